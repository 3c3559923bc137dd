// Sufficient containment conditions reported as signed margins, plus the
// machine-checkable invariance certificate.
#pragma once

#include <json.hpp>
#include <string>

#include "reachdesign/reach.hpp"

namespace reachdesign {

// Every margin is f - rho (raw) and (f - rho)/scale (normalized). A candidate
// is feasible iff every entry is >= -tolerance.
struct ConstraintMargins {
  Mat safety;        // N x n_hx, rows k = 1..N
  Mat input;         // N x n_hu, rows k = 0..N-1
  Vec invariance;    // n_hr
  Vec realizability; // (p - lb, ub - p)
  Mat safety_norm;
  Mat input_norm;
  Vec invariance_norm;
  Vec realizability_norm;
  double tolerance = 1e-6;
  bool feasible = false;
  double min_margin = 0.0;       // most negative raw margin
  double min_margin_norm = 0.0;  // most negative normalized margin
  std::string worst;             // identifier of the most violated constraint

  // Normalized margins in solver order: safety (k-major), input (k-major),
  // invariance. Realizability is handled as variable bounds by the solver.
  Vec flattened_norm() const;
};

ConstraintMargins evaluate(const ReachResult& result, const ReachSpec& spec,
                           const Box& design_bounds, const Vec& p,
                           double tolerance = 1e-6);

// Emits a versioned record asserting that the union of R(0..N-1) is robustly
// positive invariant and the closed-loop system safe for all time. The record
// embeds the discrete model and spec so it can be re-verified offline by
// recomputation; refuses to emit for infeasible candidates.
nlohmann::json certificate(const ReachResult& result, const ReachSpec& spec,
                           const DiscreteClosedLoop& model,
                           const ConstraintMargins& margins, const Vec& p);

struct CertificateCheck {
  bool ok = false;
  std::string reason;
  double max_support_discrepancy = 0.0;
};

// Integrity hash + full recomputation of the reach supports.
CertificateCheck verify_certificate(const nlohmann::json& doc);

}  // namespace reachdesign
