// Small dense convex QP solver used for the SQP subproblems:
//   min 1/2 x'Px + q'x   s.t.  l <= Ax <= u
// Operator-splitting (ADMM) with per-row penalties, adaptive rho and an
// active-set polish pass. Deterministic for fixed inputs.
#pragma once

#include "reachdesign/sets.hpp"

namespace reachdesign {

struct QpSettings {
  double sigma = 1e-6;
  double alpha = 1.6;
  double rho0 = 0.1;
  double eps_abs = 1e-9;
  double eps_rel = 1e-9;
  int max_iter = 20000;
  int adaptive_rho_interval = 50;
  bool polish = true;
};

struct QpResult {
  Vec x;  // primal solution
  Vec y;  // dual solution (one multiplier per row of A)
  int iterations = 0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  bool converged = false;
  bool polished = false;
};

QpResult solve_qp(const Mat& p_mat, const Vec& q, const Mat& a_mat,
                  const Vec& lower, const Vec& upper,
                  const QpSettings& settings = {});

}  // namespace reachdesign
