// Solves the set-based co-design program over the design vector p with
// reach-based cost and constraint margins.
//
// Method: SQP with forward finite-difference Jacobians on bound-scaled
// variables, elastic l1-penalty QP subproblems, damped BFGS on the
// Lagrangian and a backtracking line search on the l1 exact-penalty merit.
// Latin-hypercube multistart; a Nelder-Mead fallback on the penalized
// objective rescues starts the SQP leaves infeasible.
#pragma once

#include <cstdint>

#include "reachdesign/constraints.hpp"
#include "reachdesign/cost.hpp"

namespace reachdesign {

struct CoDesignProblem {
  SystemFamily family;
  ReachSpec spec;
  CostSpec cost;

  // Per-candidate output map: family.cost_map, then the static cost.Q,
  // then identity.
  Mat cost_map_at(const Vec& p) const;
};

struct SolverOptions {
  int max_iterations = 200;  // SQP iterations per start (per phase)
  double fd_step = 1e-6;     // forward-difference step, scaled variables
  double constraint_tolerance = 1e-6;
  int multistarts = 8;
  std::uint64_t seed = 0;
  Vec scaling;  // optional per-component span override; empty = from bounds
  double stall_cost_change = 1e-8;  // see stall_iterations
  int stall_iterations = 5;
  double penalty_ceiling = 1e12;
  double trust_initial = 0.1;        // initial trust radius, scaled space
  double start_violation_cap = 25.0; // start conditioning threshold
  bool nm_fallback = true;
  long nm_max_evals = 4000;
  int max_threads = 0;  // 0 = REACHDESIGN_THREADS env or hardware
};

struct CandidateEval {
  CostBreakdown cost;
  ConstraintMargins margins;
  bool stable = true;
};

// reach -> total_cost -> margins; unstable candidates come back with the
// penalty-ceiling cost and fully violated margins instead of an exception.
CandidateEval evaluate_candidate(const CoDesignProblem& problem, const Vec& p);

struct TraceEntry {
  int start = 0;
  int iteration = 0;
  double cost = 0.0;
  double max_violation = 0.0;  // normalized; 0 when feasible
  long evaluations = 0;        // cumulative within the start
};

struct StartSummary {
  int index = 0;
  Vec p0;
  Vec p_star;
  double cost = 0.0;
  double max_violation = 0.0;
  bool feasible = false;
  int iterations = 0;
  long evaluations = 0;
  bool used_fallback = false;
};

struct OptimizationReport {
  Vec p_star;
  CostBreakdown cost;
  ConstraintMargins margins;
  bool feasible = false;  // false = no-feasible-point; p_star is then the
                          // least-infeasible candidate seen
  int iterations = 0;
  long evaluation_count = 0;
  double wall_time_s = 0.0;
  std::vector<StartSummary> starts;
  std::vector<TraceEntry> trace;
};

// Best feasible design across multistarts (feasibility first, then cost).
// Deterministic for a fixed seed; never returns an infeasible point while
// any evaluated candidate was feasible.
OptimizationReport solve(const CoDesignProblem& problem,
                         const SolverOptions& options = {});

struct SensitivityEntry {
  Vec direction;
  double cost_forward = 0.0;   // forward-difference slope
  double cost_backward = 0.0;  // backward-difference slope
  double cost_central = 0.0;
  Vec margin_central;  // normalized-margin slopes (flattened order)
  bool kink = false;   // forward/backward mismatch above 10%
};

struct SensitivityProfile {
  std::vector<SensitivityEntry> entries;
};

SensitivityProfile sensitivity_scan(const CoDesignProblem& problem,
                                    const Vec& p, const Mat& directions,
                                    double step = 1e-6);

}  // namespace reachdesign
