// Parametric closed-loop discrete-time LTI models: zero-order-hold
// discretization, the one-step successor operator, the control-action set
// map, and plain trajectory simulation.
#pragma once

#include <functional>
#include <string>
#include <vector>

#include "reachdesign/sets.hpp"

namespace reachdesign {

// Raised when a candidate's discretization or tube propagation blows up.
// The optimizer folds this into penalty semantics instead of propagating NaN.
class UnstableCandidateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// xdot = A x + B u + E v
struct ContinuousLti {
  Mat A;  // n x n
  Mat B;  // n x m
  Mat E;  // n x d
};

// x(k+1) = Ad x(k) + Ed v(k), u(k) = K x(k)
struct DiscreteClosedLoop {
  Mat Ad;     // n x n
  Mat Ed;     // n x d
  Mat K;      // m x n (zero rows = no control channel)
  double dt;  // seconds

  Eigen::Index state_dim() const { return Ad.rows(); }
  Eigen::Index disturbance_dim() const { return Ed.cols(); }
  Eigen::Index input_dim() const { return K.rows(); }
};

// How the held disturbance is discretized.
//   kExact: Ed = integral_0^dt exp(Acl s) ds * E (augmented exponential)
//   kEuler: Ed = dt * E
enum class DisturbanceDiscretization { kExact, kEuler };

// Closes the loop (Acl = A + B K) and discretizes with a zero-order hold on
// the disturbance. Both Ad and Ed come from one augmented matrix exponential.
DiscreteClosedLoop zoh_discretize(
    const ContinuousLti& sys, const Mat& gain, double dt,
    DisturbanceDiscretization conv = DisturbanceDiscretization::kExact);

// Forward reachable set Ad R + Ed V; exact for LTI dynamics.
Zonotope successor(const Zonotope& reach_set, const Zonotope& disturbance,
                   const DiscreteClosedLoop& model);

// {K x : x in R}; exact for linear feedback.
Zonotope control_set(const Zonotope& reach_set, const Mat& gain);

struct SimResult {
  Mat states;  // (N+1) x n, row k = x(k)
  Mat inputs;  // N x m, row k = u(k) = K x(k)
};

// v_seq rows are v(0..N-1) held constant over each sample interval.
SimResult simulate(const DiscreteClosedLoop& model, const Vec& x0,
                   const Mat& v_seq);

// Parametric map from a design vector to a concrete closed-loop model.
struct SystemFamily {
  std::function<DiscreteClosedLoop(const Vec&)> build;
  Box bounds;                       // per-component design bounds
  std::vector<std::string> labels;  // component names (units in the label)
  // Optional per-candidate output map Q(p) used by the cost; identity if null.
  std::function<Mat(const Vec&)> cost_map;

  Eigen::Index design_dim() const { return bounds.dim(); }
  Mat cost_map_at(const Vec& p, Eigen::Index state_dim) const;
};

}  // namespace reachdesign
