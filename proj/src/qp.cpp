#include "reachdesign/qp.hpp"

#include <cmath>

namespace reachdesign {

namespace {

double inf_norm(const Vec& v) {
  return v.size() ? v.cwiseAbs().maxCoeff() : 0.0;
}

// KKT solve on the guessed active set; returns false when the system is too
// ill-conditioned or the candidate is worse than the ADMM iterate.
bool try_polish(const Mat& p_mat, const Vec& q, const Mat& a_mat,
                const Vec& lower, const Vec& upper, QpResult& result) {
  const Eigen::Index n = p_mat.rows();
  const Eigen::Index m = a_mat.rows();
  std::vector<Eigen::Index> active;
  std::vector<double> target;
  for (Eigen::Index i = 0; i < m; ++i) {
    const double slack_lo = a_mat.row(i).dot(result.x) - lower(i);
    const double slack_hi = upper(i) - a_mat.row(i).dot(result.x);
    if (result.y(i) < -1e-10 || slack_lo < 1e-8) {
      active.push_back(i);
      target.push_back(lower(i));
    } else if (result.y(i) > 1e-10 || slack_hi < 1e-8) {
      active.push_back(i);
      target.push_back(upper(i));
    }
    if (!active.empty() && active.back() == i &&
        (!std::isfinite(target.back()))) {
      active.pop_back();
      target.pop_back();
    }
  }
  const Eigen::Index na = static_cast<Eigen::Index>(active.size());
  Mat kkt = Mat::Zero(n + na, n + na);
  kkt.topLeftCorner(n, n) = p_mat + 1e-12 * Mat::Identity(n, n);
  Vec rhs(n + na);
  rhs.head(n) = -q;
  for (Eigen::Index j = 0; j < na; ++j) {
    kkt.block(n + j, 0, 1, n) = a_mat.row(active[static_cast<size_t>(j)]);
    kkt.block(0, n + j, n, 1) =
        a_mat.row(active[static_cast<size_t>(j)]).transpose();
    kkt(n + j, n + j) = -1e-12;
    rhs(n + j) = target[static_cast<size_t>(j)];
  }
  Eigen::LDLT<Mat> ldlt(kkt);
  if (ldlt.info() != Eigen::Success) return false;
  const Vec sol = ldlt.solve(rhs);
  if (!sol.allFinite()) return false;

  const Vec x = sol.head(n);
  // Feasibility check before accepting.
  const Vec ax = a_mat * x;
  for (Eigen::Index i = 0; i < m; ++i) {
    if (ax(i) < lower(i) - 1e-7 || ax(i) > upper(i) + 1e-7) return false;
  }
  const double obj_new = 0.5 * x.dot(p_mat * x) + q.dot(x);
  const double obj_old =
      0.5 * result.x.dot(p_mat * result.x) + q.dot(result.x);
  if (obj_new > obj_old + 1e-9 * (1.0 + std::abs(obj_old))) return false;

  Vec y = Vec::Zero(m);
  for (Eigen::Index j = 0; j < na; ++j) y(active[static_cast<size_t>(j)]) = sol(n + j);
  result.x = x;
  result.y = y;
  result.polished = true;
  return true;
}

}  // namespace

QpResult solve_qp(const Mat& p_mat, const Vec& q, const Mat& a_mat,
                  const Vec& lower, const Vec& upper,
                  const QpSettings& settings) {
  const Eigen::Index n = p_mat.rows();
  const Eigen::Index m = a_mat.rows();
  if (p_mat.cols() != n || q.size() != n || a_mat.cols() != n ||
      lower.size() != m || upper.size() != m) {
    throw std::invalid_argument("solve_qp: inconsistent dimensions");
  }

  QpResult result;
  result.x = Vec::Zero(n);
  result.y = Vec::Zero(m);
  Vec z = Vec::Zero(m);

  Vec rho(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const bool equality =
        std::isfinite(lower(i)) && std::isfinite(upper(i)) &&
        (upper(i) - lower(i)) < 1e-12;
    rho(i) = equality ? 1e3 * settings.rho0 : settings.rho0;
  }

  Eigen::LDLT<Mat> kkt;
  const auto refactor = [&]() {
    Mat k = p_mat + settings.sigma * Mat::Identity(n, n);
    k.noalias() += a_mat.transpose() * rho.asDiagonal() * a_mat;
    kkt.compute(k);
  };
  refactor();

  const double q_norm = inf_norm(q);
  for (int it = 1; it <= settings.max_iter; ++it) {
    const Vec rhs = settings.sigma * result.x - q +
                    a_mat.transpose() * (rho.cwiseProduct(z) - result.y);
    const Vec x_tilde = kkt.solve(rhs);
    const Vec z_tilde = a_mat * x_tilde;
    const Vec x_next =
        settings.alpha * x_tilde + (1.0 - settings.alpha) * result.x;
    Vec z_next = settings.alpha * z_tilde + (1.0 - settings.alpha) * z +
                 result.y.cwiseQuotient(rho);
    z_next = z_next.cwiseMax(lower).cwiseMin(upper);
    result.y += rho.cwiseProduct(settings.alpha * z_tilde +
                                 (1.0 - settings.alpha) * z - z_next);
    result.x = x_next;
    z = z_next;
    result.iterations = it;

    if (it % 10 == 0 || it == settings.max_iter) {
      const Vec ax = a_mat * result.x;
      const Vec px = p_mat * result.x;
      const Vec aty = a_mat.transpose() * result.y;
      result.primal_residual = inf_norm(ax - z);
      result.dual_residual = inf_norm(px + q + aty);
      const double eps_prim =
          settings.eps_abs +
          settings.eps_rel * std::max(inf_norm(ax), inf_norm(z));
      const double eps_dual =
          settings.eps_abs +
          settings.eps_rel *
              std::max({inf_norm(px), inf_norm(aty), q_norm});
      if (result.primal_residual <= eps_prim &&
          result.dual_residual <= eps_dual) {
        result.converged = true;
        break;
      }
      if (settings.adaptive_rho_interval > 0 &&
          it % settings.adaptive_rho_interval == 0) {
        const double scale =
            std::sqrt((result.primal_residual / std::max(eps_prim, 1e-16)) /
                      std::max(result.dual_residual / std::max(eps_dual, 1e-16),
                               1e-16));
        if (scale > 5.0 || scale < 0.2) {
          rho = (rho * std::clamp(scale, 1e-3, 1e3))
                    .cwiseMax(1e-6)
                    .cwiseMin(1e6);
          refactor();
        }
      }
    }
  }

  if (settings.polish) try_polish(p_mat, q, a_mat, lower, upper, result);
  return result;
}

}  // namespace reachdesign
