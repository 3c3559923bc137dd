#include "reachdesign/lti.hpp"

#include <unsupported/Eigen/MatrixFunctions>

namespace reachdesign {

namespace {

void require(bool cond, const char* msg) {
  if (!cond) throw std::invalid_argument(msg);
}

}  // namespace

DiscreteClosedLoop zoh_discretize(const ContinuousLti& sys, const Mat& gain,
                                  double dt, DisturbanceDiscretization conv) {
  const Eigen::Index n = sys.A.rows();
  const Eigen::Index d = sys.E.cols();
  require(dt > 0.0, "zoh: dt must be positive");
  require(sys.A.cols() == n, "zoh: A must be square");
  require(sys.B.rows() == n && sys.E.rows() == n, "zoh: B/E row mismatch");
  require(gain.cols() == n && gain.rows() == sys.B.cols(),
          "zoh: gain dimensions must match B");
  require(sys.A.allFinite() && sys.B.allFinite() && sys.E.allFinite() &&
              gain.allFinite(),
          "zoh: matrices must be finite");

  const Mat a_cl = sys.A + sys.B * gain;
  DiscreteClosedLoop model;
  model.K = gain;
  model.dt = dt;

  if (conv == DisturbanceDiscretization::kEuler) {
    model.Ad = (a_cl * dt).exp();
    model.Ed = dt * sys.E;
  } else {
    // exp([[Acl, E],[0,0]] dt) = [[Ad, Ed],[0, I]]
    Mat aug = Mat::Zero(n + d, n + d);
    aug.topLeftCorner(n, n) = a_cl;
    aug.topRightCorner(n, d) = sys.E;
    const Mat big = (aug * dt).exp();
    model.Ad = big.topLeftCorner(n, n);
    model.Ed = big.topRightCorner(n, d);
  }
  if (!model.Ad.allFinite() || !model.Ed.allFinite()) {
    throw UnstableCandidateError("zoh: matrix exponential overflowed");
  }
  return model;
}

Zonotope successor(const Zonotope& reach_set, const Zonotope& disturbance,
                   const DiscreteClosedLoop& model) {
  require(reach_set.dim() == model.state_dim(),
          "successor: state dimension mismatch");
  require(disturbance.dim() == model.disturbance_dim(),
          "successor: disturbance dimension mismatch");
  return minkowski_sum(linear_map(model.Ad, reach_set),
                       linear_map(model.Ed, disturbance));
}

Zonotope control_set(const Zonotope& reach_set, const Mat& gain) {
  require(gain.cols() == reach_set.dim(),
          "control_set: gain dimension mismatch");
  require(gain.rows() > 0, "control_set: gain must have at least one row");
  return linear_map(gain, reach_set);
}

SimResult simulate(const DiscreteClosedLoop& model, const Vec& x0,
                   const Mat& v_seq) {
  const Eigen::Index n = model.state_dim();
  const Eigen::Index steps = v_seq.rows();
  require(x0.size() == n, "simulate: initial state dimension mismatch");
  require(v_seq.cols() == model.disturbance_dim(),
          "simulate: disturbance dimension mismatch");

  SimResult out;
  out.states.resize(steps + 1, n);
  out.inputs.resize(steps, model.input_dim());
  out.states.row(0) = x0.transpose();
  Vec x = x0;
  for (Eigen::Index k = 0; k < steps; ++k) {
    if (model.input_dim() > 0) out.inputs.row(k) = (model.K * x).transpose();
    x = model.Ad * x + model.Ed * v_seq.row(k).transpose();
    out.states.row(k + 1) = x.transpose();
  }
  return out;
}

Mat SystemFamily::cost_map_at(const Vec& p, Eigen::Index state_dim) const {
  if (cost_map) return cost_map(p);
  return Mat::Identity(state_dim, state_dim);
}

}  // namespace reachdesign
