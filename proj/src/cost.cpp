#include "reachdesign/cost.hpp"

namespace reachdesign {

double CostSpec::mp(const Vec& p) const {
  if (mp_hook) return mp_hook(p);
  if (mp_weights.size() == 0) return 0.0;
  if (mp_weights.size() != p.size()) {
    throw std::invalid_argument("cost: mp weight dimension mismatch");
  }
  return mp_weights.dot(p);
}

SetError error_supports(const Vec& rho_cardinal, const Vec& ref) {
  if (rho_cardinal.size() != 2 * ref.size()) {
    throw std::invalid_argument("error_supports: dimension mismatch");
  }
  const Eigen::Index q = ref.size();
  SetError e;
  e.rho_plus = rho_cardinal.head(q) - ref;
  e.rho_minus = rho_cardinal.tail(q) + ref;
  return e;
}

SetError error_supports(const Vec& rho_cardinal,
                        const std::function<double(const Vec&)>& ref_support,
                        Eigen::Index dim) {
  if (rho_cardinal.size() != 2 * dim) {
    throw std::invalid_argument("error_supports: dimension mismatch");
  }
  SetError e;
  e.rho_plus.resize(dim);
  e.rho_minus.resize(dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    e.rho_plus(i) = rho_cardinal(i) + ref_support(-Vec::Unit(dim, i));
    e.rho_minus(i) = rho_cardinal(dim + i) + ref_support(Vec::Unit(dim, i));
  }
  return e;
}

Vec center_estimate(const SetError& e) {
  return 0.5 * (e.rho_plus - e.rho_minus);
}

Vec half_widths(const SetError& e) {
  return 0.5 * (e.rho_plus + e.rho_minus);
}

double r2_metric(const SetError& e) {
  return half_widths(e).norm() + center_estimate(e).norm();
}

CostBreakdown total_cost(const ReachResult& result, const CostSpec& spec,
                         const Vec& p) {
  const Eigen::Index q = result.rho_qx.cols() / 2;
  const Eigen::Index m = result.rho_lu.cols() / 2;
  const Vec x_ref = spec.x_ref.size() ? spec.x_ref : Vec::Zero(q);
  const Vec u_ref = spec.u_ref.size() ? spec.u_ref : Vec::Zero(m);
  if (x_ref.size() != q) {
    throw std::invalid_argument("total_cost: x_ref dimension mismatch");
  }
  if (u_ref.size() != m) {
    throw std::invalid_argument("total_cost: u_ref dimension mismatch");
  }

  CostBreakdown out;
  out.mp = spec.mp(p);
  out.per_step_state.resize(result.N + 1);
  out.per_step_input.resize(result.N);
  const auto state_error = [&](int k) {
    const Vec rho = result.rho_qx.row(k).transpose();
    return spec.x_ref_support ? error_supports(rho, spec.x_ref_support, q)
                              : error_supports(rho, x_ref);
  };
  const auto input_error = [&](int k) {
    const Vec rho = result.rho_lu.row(k).transpose();
    return spec.u_ref_support ? error_supports(rho, spec.u_ref_support, m)
                              : error_supports(rho, u_ref);
  };
  for (int k = 0; k <= result.N; ++k) {
    out.per_step_state(k) = r2_metric(state_error(k));
  }
  for (int k = 0; k < result.N; ++k) {
    out.per_step_input(k) = m > 0 ? r2_metric(input_error(k)) : 0.0;
  }
  out.terminal = spec.gamma1 * out.per_step_state(result.N);
  out.running_state =
      spec.gamma2 * out.per_step_state.head(result.N).sum();
  out.running_input = spec.gamma3 * out.per_step_input.sum();
  out.total = out.mp + out.terminal + out.running_state + out.running_input;
  return out;
}

}  // namespace reachdesign
