// Reachable-tube propagation for a candidate design and extraction of the
// support-function vectors the costs and constraints are built from.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "reachdesign/lti.hpp"
#include "reachdesign/sets.hpp"

namespace reachdesign {

// Problem geometry shared by every candidate: operating region, disturbance
// set, horizon, and the static constraint polytopes.
struct ReachSpec {
  Box R0;             // operating region (initial set)
  Box V;              // disturbance set
  int N;              // horizon, steps
  HPolytope X_safe;   // safe subset of the state space
  HPolytope U_adm;    // admissible control actions (0 rows = unconstrained)
  HPolytope R0_poly;  // H-rep of R0, derived

  ReachSpec() : ReachSpec(Box(), Box(), 1, HPolytope(), HPolytope()) {}
  ReachSpec(Box r0, Box v, int horizon, HPolytope x_safe, HPolytope u_adm);
};

struct ReachOptions {
  bool store_tubes = true;
  Eigen::Index max_generators = 0;  // 0 = no order reduction
  double blowup_limit = 1e12;
};

// Deduplicated direction-evaluation plan. Identical directions shared between
// the cardinal template, X_safe, R0 and U_adm are evaluated once and fanned
// out; the fanned-out values are bit-identical to naive evaluation.
struct DirectionPlan {
  Mat state_dirs;  // unique state-space directions, rows
  Mat input_dirs;  // unique input-space directions, rows
  std::vector<Eigen::Index> lx_map;  // 2n cardinal targets -> state_dirs row
  std::vector<Eigen::Index> x_map;   // X_safe rows -> state_dirs row
  std::vector<Eigen::Index> r_map;   // R0_poly rows -> state_dirs row
  std::vector<Eigen::Index> lu_map;  // 2m cardinal targets -> input_dirs row
  std::vector<Eigen::Index> u_map;   // U_adm rows -> input_dirs row

  Eigen::Index naive_state_count() const {
    return static_cast<Eigen::Index>(lx_map.size() + x_map.size() +
                                     r_map.size());
  }
  Eigen::Index naive_input_count() const {
    return static_cast<Eigen::Index>(lu_map.size() + u_map.size());
  }
};

DirectionPlan shared_direction_dedup(const ReachSpec& spec,
                                     Eigen::Index input_dim);

// Per-step support vectors. Row indexing:
//   rho_lx, rho_qx : rows k = 0..N   (k = 0 is the operating region itself)
//   rho_x          : row k-1 holds R(k), k = 1..N
//   rho_lu, rho_u  : row k holds U(k), k = 0..N-1
struct ReachResult {
  int N = 0;
  Mat rho_lx;  // (N+1) x 2n cardinal supports of R(k)
  Mat rho_qx;  // (N+1) x 2q cardinal supports of Q R(k)
  Mat rho_x;   // N x n_hx supports of R(k) in X_safe normals
  Mat rho_lu;  // N x 2m cardinal supports of U(k)
  Mat rho_u;   // N x n_hu supports of U(k) in U_adm normals
  Vec rho_r;   // n_hr supports of R(N) in R0 normals
  Mat cost_map;                      // Q actually applied (q x n)
  std::vector<Zonotope> state_tube;  // R(0..N) when stored
  std::vector<Zonotope> input_tube;  // U(0..N-1) when stored
};

ReachResult reach(const ReachSpec& spec, const DiscreteClosedLoop& model,
                  const Mat& cost_map, const ReachOptions& opts = {});

// Convenience overload: builds the model and cost map from the family.
ReachResult reach(const ReachSpec& spec, const SystemFamily& family,
                  const Vec& p, const ReachOptions& opts = {});

// Independent falsification oracle: uniform sampling of initial states and
// per-step disturbances plus deterministic extreme-vertex witness sequences
// that attain the tube supports. Reports states that escape the stored
// step-k template inequalities or the safe set.
struct FalsifyViolation {
  std::string kind;  // "tube" or "safety"
  long trial;        // -1 for deterministic witnesses
  int step;
  double amount;  // how far past the bound
};

struct FalsifyReport {
  long trials = 0;
  int horizon = 0;
  long tube_violations = 0;
  long safety_violations = 0;
  double worst_tube_slack = 0.0;     // most negative tube margin seen
  double worst_safety_margin = 0.0;  // most negative safety margin seen
  std::vector<FalsifyViolation> examples;

  bool clean() const { return tube_violations == 0 && safety_violations == 0; }
};

FalsifyReport monte_carlo_falsify(const ReachSpec& spec,
                                  const SystemFamily& family, const Vec& p,
                                  long trials, int horizon, std::uint64_t seed,
                                  double slack = kDefaultTol);

FalsifyReport monte_carlo_falsify(const ReachSpec& spec,
                                  const DiscreteClosedLoop& model,
                                  const ReachResult& result, long trials,
                                  int horizon, std::uint64_t seed,
                                  double slack = kDefaultTol);

}  // namespace reachdesign
