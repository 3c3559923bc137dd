#include "reachdesign/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <future>
#include <numeric>
#include <random>
#include <thread>

#include "reachdesign/qp.hpp"

namespace reachdesign {

namespace {

constexpr double kInfeasibleSentinel = -1e9;  // normalized margin at ceiling

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Scaled coordinates: z in [0,1]^np <-> p = lb + z .* span.
struct VariableMap {
  Vec lower;
  Vec span;

  explicit VariableMap(const Box& bounds, const Vec& override_span)
      : lower(bounds.lower), span(bounds.upper - bounds.lower) {
    if (override_span.size() == span.size()) span = override_span;
    for (Eigen::Index i = 0; i < span.size(); ++i) {
      span(i) = std::max(span(i), 1e-12);
    }
  }
  Vec to_p(const Vec& z) const { return lower + z.cwiseProduct(span); }
  Vec to_z(const Vec& p) const {
    return (p - lower).cwiseQuotient(span);
  }
};

// One reach + cost + margins evaluation in scaled coordinates, with best-so-
// far tracking. Penalty-ceiling candidates never enter the best record.
class Evaluator {
 public:
  Evaluator(const CoDesignProblem& problem, const VariableMap& map,
            double ceiling, double tol)
      : problem_(problem), map_(map), ceiling_(ceiling), tol_(tol) {}

  struct Sample {
    double cost = 0.0;
    Vec margins;         // normalized, solver order
    bool at_ceiling = false;
    double max_violation = 0.0;
  };

  Sample operator()(const Vec& z) {
    ++count_;
    Sample s;
    if (!z.allFinite()) {
      s.at_ceiling = true;
      s.cost = ceiling_;
      s.margins = Vec::Constant(margin_count(), kInfeasibleSentinel);
      s.max_violation = -kInfeasibleSentinel;
      return s;
    }
    const Vec p = map_.to_p(z.cwiseMax(0.0).cwiseMin(1.0));
    try {
      ReachOptions opts;
      opts.store_tubes = false;
      opts.blowup_limit = ceiling_;
      const ReachResult res = reach(problem_.spec, problem_.family.build(p),
                                    problem_.cost_map_at(p), opts);
      const CostBreakdown cb = total_cost(res, problem_.cost, p);
      const ConstraintMargins cm =
          evaluate(res, problem_.spec, problem_.family.bounds, p, tol_);
      s.cost = cb.total;
      s.margins = cm.flattened_norm();
      if (!std::isfinite(s.cost) || !s.margins.allFinite()) {
        throw UnstableCandidateError("non-finite cost or margins");
      }
    } catch (const UnstableCandidateError&) {
      s.at_ceiling = true;
      s.cost = ceiling_;
      s.margins = Vec::Constant(margin_count(), kInfeasibleSentinel);
    }
    s.max_violation = s.margins.size()
                          ? std::max(0.0, -s.margins.minCoeff())
                          : 0.0;
    if (!s.at_ceiling) {
      const bool feas = s.max_violation <= tol_;
      const bool better =
          !has_best_ ||
          (feas && !best_feasible_) ||
          (feas == best_feasible_ &&
           (feas ? s.cost < best_cost_ : s.max_violation < best_violation_));
      if (better) {
        has_best_ = true;
        best_feasible_ = feas;
        best_cost_ = s.cost;
        best_violation_ = s.max_violation;
        best_z_ = z.cwiseMax(0.0).cwiseMin(1.0);
      }
    }
    return s;
  }

  Eigen::Index margin_count() const {
    return static_cast<Eigen::Index>(problem_.spec.N) *
               (problem_.spec.X_safe.num_rows() +
                problem_.spec.U_adm.num_rows()) +
           problem_.spec.R0_poly.num_rows();
  }

  long count() const { return count_; }
  bool has_best() const { return has_best_; }
  bool best_feasible() const { return best_feasible_; }
  double best_cost() const { return best_cost_; }
  double best_violation() const { return best_violation_; }
  const Vec& best_z() const { return best_z_; }

 private:
  const CoDesignProblem& problem_;
  const VariableMap& map_;
  double ceiling_;
  double tol_;
  long count_ = 0;
  bool has_best_ = false;
  bool best_feasible_ = false;
  double best_cost_ = 0.0;
  double best_violation_ = 0.0;
  Vec best_z_;
};

struct SqpOutcome {
  int iterations = 0;
  std::vector<TraceEntry> trace;
};

// Core SQP loop in scaled coordinates. Progress lands in the evaluator's
// best record; trace rows are appended per accepted iteration.
SqpOutcome run_sqp(Evaluator& eval, Vec z, const SolverOptions& opt,
                   int start_index, int iteration_offset) {
  const Eigen::Index nz = z.size();
  SqpOutcome out;

  Evaluator::Sample cur = eval(z);
  if (cur.at_ceiling) return out;
  const double fscale = std::max(1.0, std::abs(cur.cost));
  const Eigen::Index mc = cur.margins.size();

  Mat hess = Mat::Identity(nz, nz);
  Vec lam = Vec::Zero(mc);
  double mu = 1.0;
  double trust = opt.trust_initial;
  Vec grad_lag_prev;
  Vec z_prev;
  int stall = 0;
  double last_cost = cur.cost;

  for (int it = 0; it < opt.max_iterations; ++it) {
    // Forward-difference gradient and margin Jacobian.
    Vec grad(nz);
    Mat jac(mc, nz);
    bool probe_ceiling = false;
    for (Eigen::Index j = 0; j < nz; ++j) {
      const double h = (z(j) + opt.fd_step <= 1.0) ? opt.fd_step : -opt.fd_step;
      Vec zp = z;
      zp(j) += h;
      const Evaluator::Sample s = eval(zp);
      if (s.at_ceiling) {
        probe_ceiling = true;
        break;
      }
      grad(j) = (s.cost - cur.cost) / fscale / h;
      jac.col(j) = (s.margins - cur.margins) / h;
    }
    if (probe_ceiling) break;  // differentiating across the ceiling is hopeless

    // Damped BFGS on the Lagrangian gradient.
    const Vec grad_lag = grad - jac.transpose() * lam;
    if (grad_lag_prev.size() == nz) {
      const Vec s = z - z_prev;
      const Vec y = grad_lag - grad_lag_prev;
      const double s_bs = s.dot(hess * s);
      const double sy = s.dot(y);
      if (s_bs > 1e-16 && s.norm() > 1e-14) {
        const double theta =
            (sy >= 0.2 * s_bs) ? 1.0 : (0.8 * s_bs) / (s_bs - sy);
        const Vec r = theta * y + (1.0 - theta) * (hess * s);
        hess = hess - (hess * s) * (s.transpose() * hess) / s_bs +
               r * r.transpose() / std::max(s.dot(r), 1e-16);
        if (!hess.allFinite()) hess = Mat::Identity(nz, nz);
      }
    }
    z_prev = z;
    grad_lag_prev = grad_lag;

    // Elastic l1 QP:  min g'd + 1/2 d'Bd + mu 1's
    //                 s.t. J d + s >= -m, s >= 0, d within trust box.
    const Eigen::Index nv = nz + mc;
    Mat qp_p = Mat::Zero(nv, nv);
    qp_p.topLeftCorner(nz, nz) = hess + 1e-9 * Mat::Identity(nz, nz);
    Vec qp_q(nv);
    qp_q.head(nz) = grad;
    qp_q.tail(mc).setConstant(mu);
    Mat qp_a = Mat::Zero(mc + mc + nz, nv);
    qp_a.topLeftCorner(mc, nz) = jac;
    qp_a.topRightCorner(mc, mc) = Mat::Identity(mc, mc);
    qp_a.block(mc, nz, mc, mc) = Mat::Identity(mc, mc);
    qp_a.bottomLeftCorner(nz, nz) = Mat::Identity(nz, nz);
    const double kInf = std::numeric_limits<double>::infinity();
    Vec qp_l(mc + mc + nz), qp_u(mc + mc + nz);
    qp_l.head(mc) = -cur.margins;
    qp_u.head(mc).setConstant(kInf);
    qp_l.segment(mc, mc).setZero();
    qp_u.segment(mc, mc).setConstant(kInf);
    for (Eigen::Index j = 0; j < nz; ++j) {
      qp_l(2 * mc + j) = std::max(-trust, -z(j));
      qp_u(2 * mc + j) = std::min(trust, 1.0 - z(j));
    }
    const QpResult qp = solve_qp(qp_p, qp_q, qp_a, qp_l, qp_u);
    if (!qp.x.allFinite() || !qp.y.allFinite()) {
      trust *= 0.25;
      hess = Mat::Identity(nz, nz);
      if (trust < 1e-7) break;
      continue;
    }
    const Vec d = qp.x.head(nz);

    // Multipliers of the margin rows (lower-bounded rows carry y <= 0).
    lam = (-qp.y.head(mc)).cwiseMax(0.0);
    const double lam_max = lam.size() ? lam.maxCoeff() : 0.0;
    if (mu < 1.1 * lam_max) mu = std::min(2.0 * lam_max, 1e9);

    const auto viol_l1 = [](const Vec& m) {
      return m.size() ? (-m).cwiseMax(0.0).sum() : 0.0;
    };
    const double pred = -(grad.dot(d)) - 0.5 * d.dot(hess * d) +
                        mu * (viol_l1(cur.margins) -
                              viol_l1(cur.margins + jac * d));
    const double phi0 = cur.cost / fscale + mu * viol_l1(cur.margins);

    double alpha = 1.0;
    bool accepted = false;
    Evaluator::Sample next;
    Vec z_next;
    for (int ls = 0; ls < 25; ++ls) {
      z_next = (z + alpha * d).cwiseMax(0.0).cwiseMin(1.0);
      next = eval(z_next);
      const double phi =
          next.at_ceiling ? std::numeric_limits<double>::infinity()
                          : next.cost / fscale + mu * viol_l1(next.margins);
      if (phi <= phi0 - 1e-4 * alpha * std::max(pred, 0.0) - 1e-16 &&
          phi < phi0) {
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }

    ++out.iterations;
    if (accepted) {
      if (alpha >= 0.999 && pred > 0.0) trust = std::min(2.0 * trust, 0.5);
      if (alpha < 0.25) trust = std::max(0.5 * trust, 1e-7);
      z = z_next;
      cur = next;
    } else {
      trust *= 0.25;
      if (trust < 1e-7) break;
    }
    out.trace.push_back({start_index, iteration_offset + out.iterations,
                         cur.cost, cur.max_violation, eval.count()});

    const double step_inf = accepted ? (alpha * d).cwiseAbs().maxCoeff() : 0.0;
    if (accepted && step_inf < 1e-11) break;
    if (std::abs(cur.cost - last_cost) <
        opt.stall_cost_change * std::max(1.0, std::abs(cur.cost))) {
      if (++stall >= opt.stall_iterations) break;
    } else {
      stall = 0;
    }
    last_cost = cur.cost;
  }
  return out;
}

// Nelder-Mead on the l1-penalized objective; used when SQP leaves a start
// infeasible. Deterministic for a fixed starting point.
void run_nelder_mead(Evaluator& eval, const Vec& z0, double mu, long max_evals,
                     double fscale) {
  const Eigen::Index n = z0.size();
  const auto penalized = [&](const Vec& z) {
    const Evaluator::Sample s = eval(z.cwiseMax(0.0).cwiseMin(1.0));
    if (s.at_ceiling) return 1e30;
    return s.cost / fscale +
           mu * (s.margins.size() ? (-s.margins).cwiseMax(0.0).sum() : 0.0);
  };

  std::vector<Vec> simplex;
  std::vector<double> value;
  simplex.reserve(n + 1);
  simplex.push_back(z0);
  for (Eigen::Index j = 0; j < n; ++j) {
    Vec v = z0;
    v(j) += (v(j) + 0.05 <= 1.0) ? 0.05 : -0.05;
    simplex.push_back(v);
  }
  for (const Vec& v : simplex) value.push_back(penalized(v));
  long used = static_cast<long>(simplex.size());

  const auto order = [&]() {
    std::vector<size_t> idx(simplex.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(),
                     [&](size_t a, size_t b) { return value[a] < value[b]; });
    std::vector<Vec> s2;
    std::vector<double> v2;
    for (size_t i : idx) {
      s2.push_back(simplex[i]);
      v2.push_back(value[i]);
    }
    simplex.swap(s2);
    value.swap(v2);
  };

  while (used < max_evals) {
    order();
    if (std::abs(value.back() - value.front()) < 1e-14) break;
    Vec centroid = Vec::Zero(n);
    for (size_t i = 0; i + 1 < simplex.size(); ++i) centroid += simplex[i];
    centroid /= static_cast<double>(n);

    const Vec worst = simplex.back();
    const Vec refl = centroid + (centroid - worst);
    const double f_refl = penalized(refl);
    ++used;
    if (f_refl < value.front()) {
      const Vec expand = centroid + 2.0 * (centroid - worst);
      const double f_exp = penalized(expand);
      ++used;
      if (f_exp < f_refl) {
        simplex.back() = expand;
        value.back() = f_exp;
      } else {
        simplex.back() = refl;
        value.back() = f_refl;
      }
    } else if (f_refl < value[value.size() - 2]) {
      simplex.back() = refl;
      value.back() = f_refl;
    } else {
      const Vec contract = centroid + 0.5 * (worst - centroid);
      const double f_con = penalized(contract);
      ++used;
      if (f_con < value.back()) {
        simplex.back() = contract;
        value.back() = f_con;
      } else {
        for (size_t i = 1; i < simplex.size(); ++i) {
          simplex[i] = simplex[0] + 0.5 * (simplex[i] - simplex[0]);
          value[i] = penalized(simplex[i]);
          ++used;
        }
      }
    }
  }
}

struct StartResult {
  StartSummary summary;
  std::vector<TraceEntry> trace;
};

StartResult run_start(const CoDesignProblem& problem, const VariableMap& map,
                      const SolverOptions& opt, int index, Vec z0) {
  Evaluator eval(problem, map, opt.penalty_ceiling, opt.constraint_tolerance);
  StartResult out;
  out.summary.index = index;
  out.summary.p0 = map.to_p(z0);

  // Condition the start: walk toward the box center until the candidate is
  // stable and not hopelessly violated.
  const Vec center = Vec::Constant(z0.size(), 0.5);
  Vec z = z0;
  for (int i = 0; i < 60; ++i) {
    const Evaluator::Sample s = eval(z);
    if (!s.at_ceiling && s.max_violation <= opt.start_violation_cap) break;
    z = center + 0.5 * (z - center);
  }

  SqpOutcome sqp = run_sqp(eval, z, opt, index, 0);
  out.summary.iterations = sqp.iterations;
  out.trace = std::move(sqp.trace);

  if (opt.nm_fallback && eval.has_best() && !eval.best_feasible()) {
    out.summary.used_fallback = true;
    const Vec z_best = eval.best_z();
    const double fscale = std::max(1.0, std::abs(eval.best_cost()));
    run_nelder_mead(eval, z_best, 50.0, opt.nm_max_evals, fscale);
    SqpOutcome polish =
        run_sqp(eval, eval.has_best() ? eval.best_z() : z_best, opt, index,
                out.summary.iterations);
    out.summary.iterations += polish.iterations;
    for (const TraceEntry& t : polish.trace) out.trace.push_back(t);
  }

  out.summary.evaluations = eval.count();
  if (eval.has_best()) {
    out.summary.p_star = map.to_p(eval.best_z());
    out.summary.cost = eval.best_cost();
    out.summary.max_violation = eval.best_violation();
    out.summary.feasible = eval.best_feasible();
  } else {
    out.summary.p_star = out.summary.p0;
    out.summary.cost = opt.penalty_ceiling;
    out.summary.max_violation = -kInfeasibleSentinel;
    out.summary.feasible = false;
  }
  return out;
}

int thread_cap(const SolverOptions& opt) {
  if (opt.max_threads > 0) return opt.max_threads;
  if (const char* env = std::getenv("REACHDESIGN_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

}  // namespace

Mat CoDesignProblem::cost_map_at(const Vec& p) const {
  if (family.cost_map) return family.cost_map(p);
  if (cost.Q.size()) return cost.Q;
  return Mat::Identity(spec.R0.dim(), spec.R0.dim());
}

CandidateEval evaluate_candidate(const CoDesignProblem& problem, const Vec& p) {
  if (!p.allFinite()) {
    throw std::invalid_argument("evaluate_candidate: p must be finite");
  }
  CandidateEval out;
  try {
    ReachOptions opts;
    opts.store_tubes = false;
    const ReachResult res =
        reach(problem.spec, problem.family.build(p), problem.cost_map_at(p),
              opts);
    out.cost = total_cost(res, problem.cost, p);
    out.margins = evaluate(res, problem.spec, problem.family.bounds, p);
  } catch (const UnstableCandidateError&) {
    out.stable = false;
    out.cost = CostBreakdown{};
    out.cost.total = 1e12;
    // Fully violated margins with the right shapes.
    const auto& spec = problem.spec;
    out.margins.safety =
        Mat::Constant(spec.N, spec.X_safe.num_rows(), -1e12);
    out.margins.input = Mat::Constant(spec.N, spec.U_adm.num_rows(), -1e12);
    out.margins.invariance = Vec::Constant(spec.R0_poly.num_rows(), -1e12);
    out.margins.realizability =
        Vec::Constant(2 * problem.family.bounds.dim(), -1e12);
    out.margins.safety_norm =
        Mat::Constant(spec.N, spec.X_safe.num_rows(), kInfeasibleSentinel);
    out.margins.input_norm =
        Mat::Constant(spec.N, spec.U_adm.num_rows(), kInfeasibleSentinel);
    out.margins.invariance_norm =
        Vec::Constant(spec.R0_poly.num_rows(), kInfeasibleSentinel);
    out.margins.realizability_norm =
        Vec::Constant(2 * problem.family.bounds.dim(), kInfeasibleSentinel);
    out.margins.feasible = false;
    out.margins.min_margin = -1e12;
    out.margins.min_margin_norm = kInfeasibleSentinel;
    out.margins.worst = "unstable candidate";
  }
  return out;
}

OptimizationReport solve(const CoDesignProblem& problem,
                         const SolverOptions& options) {
  const auto t0 = std::chrono::steady_clock::now();
  if (options.multistarts < 1) {
    throw std::invalid_argument("solve: multistarts must be at least 1");
  }
  const VariableMap map(problem.family.bounds, options.scaling);
  const Eigen::Index nz = problem.family.bounds.dim();

  // Start 0 is the bound-box center; the rest is a Latin hypercube.
  std::vector<Vec> starts;
  starts.push_back(Vec::Constant(nz, 0.5));
  if (options.multistarts > 1) {
    const int k = options.multistarts - 1;
    std::mt19937_64 rng(options.seed);
    Mat lhs(k, nz);
    for (Eigen::Index j = 0; j < nz; ++j) {
      std::vector<int> perm(static_cast<size_t>(k));
      std::iota(perm.begin(), perm.end(), 0);
      for (int i = k - 1; i > 0; --i) {
        const int swap_with = static_cast<int>(rng() % (i + 1));
        std::swap(perm[static_cast<size_t>(i)],
                  perm[static_cast<size_t>(swap_with)]);
      }
      for (int i = 0; i < k; ++i) {
        lhs(i, j) = (perm[static_cast<size_t>(i)] + uniform01(rng)) / k;
      }
    }
    for (int i = 0; i < k; ++i) starts.push_back(lhs.row(i).transpose());
  }

  // Independent starts; a bounded pool keeps REACHDESIGN_THREADS honored.
  const int pool = std::min<int>(thread_cap(options),
                                 static_cast<int>(starts.size()));
  std::vector<StartResult> results(starts.size());
  size_t next = 0;
  while (next < starts.size()) {
    const size_t batch = std::min<size_t>(pool, starts.size() - next);
    std::vector<std::future<StartResult>> futures;
    for (size_t i = 0; i < batch; ++i) {
      const size_t idx = next + i;
      futures.push_back(std::async(std::launch::async, [&, idx]() {
        return run_start(problem, map, options, static_cast<int>(idx),
                         starts[idx]);
      }));
    }
    for (size_t i = 0; i < batch; ++i) results[next + i] = futures[i].get();
    next += batch;
  }

  OptimizationReport report;
  long evals = 0;
  int iters = 0;
  int best = -1;
  for (size_t i = 0; i < results.size(); ++i) {
    const StartSummary& s = results[i].summary;
    report.starts.push_back(s);
    for (const TraceEntry& t : results[i].trace) report.trace.push_back(t);
    evals += s.evaluations;
    iters += s.iterations;
    if (best < 0) {
      best = static_cast<int>(i);
      continue;
    }
    const StartSummary& b = report.starts[static_cast<size_t>(best)];
    const bool better =
        (s.feasible && !b.feasible) ||
        (s.feasible == b.feasible &&
         (s.feasible ? s.cost < b.cost : s.max_violation < b.max_violation));
    if (better) best = static_cast<int>(i);
  }
  report.iterations = iters;
  report.evaluation_count = evals;

  const StartSummary& winner = report.starts[static_cast<size_t>(best)];
  report.p_star = winner.p_star;
  report.feasible = winner.feasible;
  const CandidateEval final_eval = evaluate_candidate(problem, report.p_star);
  report.cost = final_eval.cost;
  report.margins = final_eval.margins;
  report.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return report;
}

SensitivityProfile sensitivity_scan(const CoDesignProblem& problem,
                                    const Vec& p, const Mat& directions,
                                    double step) {
  const VariableMap map(problem.family.bounds, Vec());
  SensitivityProfile profile;
  const Vec z = map.to_z(p);
  const double f0 = evaluate_candidate(problem, p).cost.total;
  for (Eigen::Index r = 0; r < directions.rows(); ++r) {
    SensitivityEntry entry;
    entry.direction = directions.row(r).transpose();
    Vec dz = entry.direction.cwiseQuotient(map.span);
    const double norm = dz.norm();
    if (norm < 1e-300) {
      profile.entries.push_back(entry);
      continue;
    }
    dz /= norm;
    const Vec z_fwd = z + step * dz;
    const Vec z_bwd = z - step * dz;
    const CandidateEval fwd = evaluate_candidate(problem, map.to_p(z_fwd));
    const CandidateEval bwd = evaluate_candidate(problem, map.to_p(z_bwd));
    entry.cost_forward = (fwd.cost.total - f0) / step;
    entry.cost_backward = (f0 - bwd.cost.total) / step;
    entry.cost_central = (fwd.cost.total - bwd.cost.total) / (2.0 * step);
    entry.margin_central =
        (fwd.margins.flattened_norm() - bwd.margins.flattened_norm()) /
        (2.0 * step);
    const double mag = std::max(
        {std::abs(entry.cost_forward), std::abs(entry.cost_backward), 1e-12});
    entry.kink =
        std::abs(entry.cost_forward - entry.cost_backward) > 0.10 * mag;
    profile.entries.push_back(entry);
  }
  return profile;
}

}  // namespace reachdesign
