// Set-to-scalar cost machinery: error sets from translated supports, the
// center/half-width estimates, the 2-norm metric and the full design cost.
#pragma once

#include <functional>

#include "reachdesign/reach.hpp"

namespace reachdesign {

struct CostSpec {
  Mat Q;         // q x n output/weighting map; empty = identity
  Vec x_ref;     // length q reference for the mapped state set
  Vec u_ref;     // length m reference for the input set
  double gamma1 = 1.0;  // terminal state-set weight
  double gamma2 = 1.0;  // running state-set weight
  double gamma3 = 0.0;  // running input-set weight
  Vec mp_weights;       // linear design-parameter cost; empty = 0
  std::function<double(const Vec&)> mp_hook;  // overrides mp_weights when set

  // Set-valued references: support function of the reference set in a given
  // direction. When set, replaces the singleton x_ref / u_ref in the error
  // sets (a singleton x_ref is the hook l -> l' x_ref).
  std::function<double(const Vec&)> x_ref_support;
  std::function<double(const Vec&)> u_ref_support;

  double mp(const Vec& p) const;
};

// Supports of a set translated by -ref, sampled in +-e_i.
struct SetError {
  Vec rho_plus;
  Vec rho_minus;
};

// rho_cardinal packs (rho(+e_1..+e_q), rho(-e_1..-e_q)) as produced by the
// reach rows; ref translates the set.
SetError error_supports(const Vec& rho_cardinal, const Vec& ref);

// Set-valued reference: E = S + (-Ref), so rho_E(l) = rho_S(l) + rho_Ref(-l).
SetError error_supports(const Vec& rho_cardinal,
                        const std::function<double(const Vec&)>& ref_support,
                        Eigen::Index dim);

Vec center_estimate(const SetError& e);
Vec half_widths(const SetError& e);

// ||d||_2 + ||c||_2; upper-bounds the set's 2-norm radius plus center offset.
double r2_metric(const SetError& e);

struct CostBreakdown {
  double total = 0.0;
  double mp = 0.0;
  double terminal = 0.0;       // gamma1 * r2(E_x(N))
  double running_state = 0.0;  // sum_k gamma2 * r2(E_x(k)), k = 0..N-1
  double running_input = 0.0;  // sum_k gamma3 * r2(E_u(k)), k = 0..N-1
  Vec per_step_state;          // unweighted r2(E_x(k)), k = 0..N
  Vec per_step_input;          // unweighted r2(E_u(k)), k = 0..N-1
};

// Full cost  m_p(p) + gamma1 r2(E_x(N)) + sum_{k=0}^{N-1} [gamma2 r2(E_x(k))
// + gamma3 r2(E_u(k))]. The breakdown sums to the total.
CostBreakdown total_cost(const ReachResult& result, const CostSpec& spec,
                         const Vec& p);

}  // namespace reachdesign
