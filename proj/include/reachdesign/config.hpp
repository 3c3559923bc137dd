// CLI configuration: a single versioned JSON document, schema-validated with
// unknown keys rejected.
#pragma once

#include <filesystem>
#include <json.hpp>
#include <optional>
#include <string>

#include "reachdesign/benchmarks.hpp"

namespace reachdesign {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct DisturbanceSpec {
  enum class Kind { kConstant, kPiecewise, kUniformRandom, kExtremeVertices };
  Kind kind = Kind::kConstant;
  Vec value;  // constant
  std::vector<std::pair<int, Vec>> schedule;  // piecewise (steps, value)
  std::optional<Vec> direction;  // extreme vertices target functional
  std::optional<int> target_step;
};

struct SimulateSpec {
  int steps = 0;  // 0 = horizon N
  std::optional<Vec> x0;  // default: operating-region center
  DisturbanceSpec disturbance;
};

struct RunConfig {
  int version = 1;
  std::uint64_t seed = 0;
  std::string model_name;
  CoDesignProblem problem;
  std::optional<Vec> fixed_design;
  SolverOptions solver;
  SimulateSpec simulate;
  bool store_tubes = true;
  Eigen::Index max_generators = 0;
  nlohmann::json raw;  // exact parsed document, for round-trip checks
};

RunConfig parse_config(const nlohmann::json& doc);
RunConfig load_config(const std::filesystem::path& path);

// parse(serialize(parse(doc))) == parse(doc); used by the round-trip test.
nlohmann::json serialize_config(const RunConfig& config);

}  // namespace reachdesign
