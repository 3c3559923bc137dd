// Orchestration behind the CLI subcommands. Exit codes are part of the
// public contract:
//   0  success / certified
//   2  configuration error
//   3  codesign found no feasible point
//   4  verify found a safety violation
//   5  verify: safe over the horizon but not certified invariant
#pragma once

#include <filesystem>
#include <iosfwd>

#include "reachdesign/config.hpp"

namespace reachdesign {

struct CliOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> starts;
};

int run_codesign(RunConfig config, const std::filesystem::path& out_dir,
                 const CliOverrides& overrides, std::ostream& log);
int run_verify(RunConfig config, const std::filesystem::path& out_dir,
               const CliOverrides& overrides, std::ostream& log);
int run_simulate(RunConfig config, const std::filesystem::path& out_dir,
                 const CliOverrides& overrides, std::ostream& log);

// Shortest round-trip decimal formatting used by every CSV artifact.
std::string format_double(double value);

}  // namespace reachdesign
