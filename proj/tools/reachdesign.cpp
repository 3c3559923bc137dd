// reachdesign codesign|verify|simulate --config <path> --out <dir>
//             [--seed <u64>] [--starts <n>]
#include <CLI11.hpp>
#include <iostream>

#include "reachdesign/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Set-based robust control co-design"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = ".";
  std::uint64_t seed = 0;
  int starts = 0;
  bool seed_given = false;
  bool starts_given = false;

  const auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "Path to the JSON run config")
        ->required();
    cmd->add_option("--out", out_dir, "Output directory for artifacts")
        ->required();
    cmd->add_option("--seed", seed, "Override the config seed")
        ->each([&](const std::string&) { seed_given = true; });
    cmd->add_option("--starts", starts, "Override the multistart count")
        ->each([&](const std::string&) { starts_given = true; });
  };

  CLI::App* codesign =
      app.add_subcommand("codesign", "Optimize the design vector");
  CLI::App* verify =
      app.add_subcommand("verify", "Check a fixed design against the spec");
  CLI::App* simulate =
      app.add_subcommand("simulate", "Simulate a fixed design");
  add_common(codesign);
  add_common(verify);
  add_common(simulate);

  CLI11_PARSE(app, argc, argv);

  try {
    reachdesign::RunConfig config = reachdesign::load_config(config_path);
    reachdesign::CliOverrides overrides;
    if (seed_given) overrides.seed = seed;
    if (starts_given) overrides.starts = starts;

    if (codesign->parsed()) {
      return reachdesign::run_codesign(std::move(config), out_dir, overrides,
                                       std::cout);
    }
    if (verify->parsed()) {
      return reachdesign::run_verify(std::move(config), out_dir, overrides,
                                     std::cout);
    }
    return reachdesign::run_simulate(std::move(config), out_dir, overrides,
                                     std::cout);
  } catch (const reachdesign::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
