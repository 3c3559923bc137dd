#include "reachdesign/reach.hpp"

#include <cmath>
#include <random>

namespace reachdesign {

namespace {

void require(bool cond, const char* msg) {
  if (!cond) throw std::invalid_argument(msg);
}

// Appends each row of `dirs` to `unique` unless an identical row exists;
// records the row index each target maps to. Exact comparison keeps the
// fanned-out supports bit-identical to naive evaluation.
void dedup_rows(const Mat& dirs, std::vector<Vec>& unique,
                std::vector<Eigen::Index>& map) {
  for (Eigen::Index i = 0; i < dirs.rows(); ++i) {
    const Vec row = dirs.row(i).transpose();
    Eigen::Index found = -1;
    for (size_t j = 0; j < unique.size(); ++j) {
      if (unique[j].size() == row.size() && unique[j] == row) {
        found = static_cast<Eigen::Index>(j);
        break;
      }
    }
    if (found < 0) {
      unique.push_back(row);
      found = static_cast<Eigen::Index>(unique.size()) - 1;
    }
    map.push_back(found);
  }
}

Mat stack_rows(const std::vector<Vec>& rows, Eigen::Index dim) {
  Mat out(static_cast<Eigen::Index>(rows.size()), dim);
  for (size_t i = 0; i < rows.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
  }
  return out;
}

Mat cardinal_rows(Eigen::Index n) {
  Mat dirs(2 * n, n);
  dirs.topRows(n) = Mat::Identity(n, n);
  dirs.bottomRows(n) = -Mat::Identity(n, n);
  return dirs;
}

Vec eval_supports(const Zonotope& z, const Mat& dirs) {
  Vec vals(dirs.rows());
  for (Eigen::Index i = 0; i < dirs.rows(); ++i) {
    vals(i) = z.support(dirs.row(i).transpose());
  }
  return vals;
}

Eigen::RowVectorXd gather(const Vec& vals,
                          const std::vector<Eigen::Index>& map) {
  Eigen::RowVectorXd out(static_cast<Eigen::Index>(map.size()));
  for (size_t i = 0; i < map.size(); ++i) {
    out(static_cast<Eigen::Index>(i)) = vals(map[i]);
  }
  return out;
}

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

Vec sample_box(const Box& box, std::mt19937_64& rng) {
  Vec x(box.dim());
  for (Eigen::Index i = 0; i < box.dim(); ++i) {
    x(i) = box.lower(i) + uniform01(rng) * (box.upper(i) - box.lower(i));
  }
  return x;
}

}  // namespace

ReachSpec::ReachSpec(Box r0, Box v, int horizon, HPolytope x_safe,
                     HPolytope u_adm)
    : R0(std::move(r0)),
      V(std::move(v)),
      N(horizon),
      X_safe(std::move(x_safe)),
      U_adm(std::move(u_adm)),
      R0_poly(R0.to_hpolytope()) {
  require(N >= 1, "reach spec: horizon must be at least 1");
  require(X_safe.dim() == R0.dim(), "reach spec: safe-set dimension mismatch");
  if (!contained_in(R0.to_zonotope(), X_safe).contained) {
    throw std::invalid_argument(
        "reach spec: operating region must lie inside the safe set");
  }
}

DirectionPlan shared_direction_dedup(const ReachSpec& spec,
                                     Eigen::Index input_dim) {
  DirectionPlan plan;
  const Eigen::Index n = spec.R0.dim();
  std::vector<Vec> unique_state;
  dedup_rows(cardinal_rows(n), unique_state, plan.lx_map);
  dedup_rows(spec.X_safe.normals(), unique_state, plan.x_map);
  dedup_rows(spec.R0_poly.normals(), unique_state, plan.r_map);
  plan.state_dirs = stack_rows(unique_state, n);

  if (input_dim > 0) {
    std::vector<Vec> unique_input;
    dedup_rows(cardinal_rows(input_dim), unique_input, plan.lu_map);
    dedup_rows(spec.U_adm.normals(), unique_input, plan.u_map);
    plan.input_dirs = stack_rows(unique_input, input_dim);
  } else {
    plan.input_dirs.resize(0, 0);
  }
  return plan;
}

ReachResult reach(const ReachSpec& spec, const DiscreteClosedLoop& model,
                  const Mat& cost_map, const ReachOptions& opts) {
  const Eigen::Index n = spec.R0.dim();
  const Eigen::Index m = model.input_dim();
  require(model.state_dim() == n, "reach: model state dimension mismatch");
  require(model.disturbance_dim() == spec.V.dim(),
          "reach: disturbance dimension mismatch");
  require(cost_map.cols() == n, "reach: cost map column mismatch");
  if (m > 0) {
    require(spec.U_adm.dim() == m, "reach: input polytope dimension mismatch");
  }

  const DirectionPlan plan = shared_direction_dedup(spec, m);
  const Eigen::Index q = cost_map.rows();
  const Mat q_cardinal = cardinal_rows(q);
  const bool identity_cost =
      (q == n) && cost_map.isIdentity(0.0);  // exact identity only

  ReachResult res;
  res.N = spec.N;
  res.cost_map = cost_map;
  res.rho_lx.resize(spec.N + 1, 2 * n);
  res.rho_qx.resize(spec.N + 1, 2 * q);
  res.rho_x.resize(spec.N, spec.X_safe.num_rows());
  res.rho_lu.resize(spec.N, 2 * m);
  res.rho_u.resize(spec.N, spec.U_adm.num_rows());
  res.rho_r.resize(spec.R0_poly.num_rows());

  Zonotope current = spec.R0.to_zonotope();
  const Zonotope disturbance = spec.V.to_zonotope();

  const auto record_state = [&](int k, const Zonotope& set) {
    const Vec vals = eval_supports(set, plan.state_dirs);
    res.rho_lx.row(k) = gather(vals, plan.lx_map);
    if (k >= 1) res.rho_x.row(k - 1) = gather(vals, plan.x_map);
    if (k == spec.N) res.rho_r = gather(vals, plan.r_map).transpose();
    if (identity_cost) {
      res.rho_qx.row(k) = res.rho_lx.row(k);
    } else {
      const Zonotope mapped = linear_map(cost_map, set);
      res.rho_qx.row(k) = eval_supports(mapped, q_cardinal).transpose();
    }
  };
  const auto record_input = [&](int k, const Zonotope& set) {
    const Vec vals = eval_supports(set, plan.input_dirs);
    res.rho_lu.row(k) = gather(vals, plan.lu_map);
    res.rho_u.row(k) = gather(vals, plan.u_map);
    if (opts.store_tubes) res.input_tube.push_back(set);
  };

  record_state(0, current);
  if (opts.store_tubes) res.state_tube.push_back(current);
  if (m > 0) record_input(0, control_set(current, model.K));

  for (int k = 1; k <= spec.N; ++k) {
    current = successor(current, disturbance, model);
    if (opts.max_generators > 0 &&
        current.num_generators() > opts.max_generators) {
      current = reduce_order(current, opts.max_generators);
    }
    const double peak = std::max(current.center().cwiseAbs().maxCoeff(),
                                 current.num_generators() > 0
                                     ? current.generators().cwiseAbs().maxCoeff()
                                     : 0.0);
    if (!std::isfinite(peak) || peak > opts.blowup_limit) {
      throw UnstableCandidateError("reach: tube support blow-up");
    }
    record_state(k, current);
    if (opts.store_tubes) res.state_tube.push_back(current);
    if (m > 0 && k < spec.N) record_input(k, control_set(current, model.K));
  }
  return res;
}

ReachResult reach(const ReachSpec& spec, const SystemFamily& family,
                  const Vec& p, const ReachOptions& opts) {
  const DiscreteClosedLoop model = family.build(p);
  return reach(spec, model, family.cost_map_at(p, model.state_dim()), opts);
}

namespace {

// Checks one simulated trajectory against the stored templates and safe set.
void check_trajectory(const ReachSpec& spec, const ReachResult& result,
                      const Mat& states, long trial, double slack,
                      FalsifyReport& report) {
  const Eigen::Index n = spec.R0.dim();
  for (Eigen::Index k = 1; k < states.rows(); ++k) {
    const Vec x = states.row(k).transpose();
    // Tube templates only exist up to step N.
    if (k <= result.N) {
      double worst = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        worst = std::min(worst, result.rho_lx(k, i) - x(i));
        worst = std::min(worst, result.rho_lx(k, n + i) + x(i));
      }
      for (Eigen::Index i = 0; i < spec.X_safe.num_rows(); ++i) {
        worst = std::min(worst, result.rho_x(k - 1, i) -
                                    spec.X_safe.normals().row(i).dot(x));
      }
      if (k == result.N) {
        for (Eigen::Index i = 0; i < spec.R0_poly.num_rows(); ++i) {
          worst = std::min(worst, result.rho_r(i) -
                                      spec.R0_poly.normals().row(i).dot(x));
        }
      }
      report.worst_tube_slack = std::min(report.worst_tube_slack, worst);
      if (worst < -slack) {
        ++report.tube_violations;
        if (report.examples.size() < 8) {
          report.examples.push_back(
              {"tube", trial, static_cast<int>(k), -worst});
        }
      }
    }
    double safety = 0.0;
    for (Eigen::Index i = 0; i < spec.X_safe.num_rows(); ++i) {
      safety = std::min(safety, spec.X_safe.offsets()(i) -
                                    spec.X_safe.normals().row(i).dot(x));
    }
    report.worst_safety_margin = std::min(report.worst_safety_margin, safety);
    if (safety < -slack) {
      ++report.safety_violations;
      if (report.examples.size() < 8) {
        report.examples.push_back(
            {"safety", trial, static_cast<int>(k), -safety});
      }
    }
  }
}

}  // namespace

FalsifyReport monte_carlo_falsify(const ReachSpec& spec,
                                  const DiscreteClosedLoop& model,
                                  const ReachResult& result, long trials,
                                  int horizon, std::uint64_t seed,
                                  double slack) {
  require(trials >= 1, "falsify: trials must be at least 1");
  require(horizon >= 1, "falsify: horizon must be at least 1");
  FalsifyReport report;
  report.trials = trials;
  report.horizon = horizon;

  std::mt19937_64 rng(seed);
  for (long t = 0; t < trials; ++t) {
    const Vec x0 = sample_box(spec.R0, rng);
    Mat v_seq(horizon, spec.V.dim());
    for (int k = 0; k < horizon; ++k) {
      v_seq.row(k) = sample_box(spec.V, rng).transpose();
    }
    const SimResult sim = simulate(model, x0, v_seq);
    check_trajectory(spec, result, sim.states, t, slack, report);
  }

  // Deterministic extreme-vertex witnesses: for each safe-set normal and each
  // step, the vertex sequence that attains the tube support in that direction.
  const Vec half_x0 = spec.R0.half_widths();
  const Vec half_v = spec.V.half_widths();
  const int n_steps = std::min(horizon, result.N);
  for (Eigen::Index row = 0; row < spec.X_safe.num_rows(); ++row) {
    for (int k = 1; k <= n_steps; ++k) {
      Vec l = spec.X_safe.normals().row(row).transpose();
      // Back-propagate the functional to pick maximizing vertices.
      Mat v_seq(k, spec.V.dim());
      Vec w = l;
      for (int j = k - 1; j >= 0; --j) {
        const Vec wv = model.Ed.transpose() * w;
        v_seq.row(j) =
            (spec.V.center() + wv.array().sign().matrix().cwiseProduct(half_v))
                .transpose();
        w = model.Ad.transpose() * w;
      }
      const Vec x0 =
          spec.R0.center() + w.array().sign().matrix().cwiseProduct(half_x0);
      const SimResult sim = simulate(model, x0, v_seq);
      check_trajectory(spec, result, sim.states, -1, slack, report);
    }
  }
  return report;
}

FalsifyReport monte_carlo_falsify(const ReachSpec& spec,
                                  const SystemFamily& family, const Vec& p,
                                  long trials, int horizon, std::uint64_t seed,
                                  double slack) {
  const DiscreteClosedLoop model = family.build(p);
  ReachOptions opts;
  opts.store_tubes = false;
  const ReachResult result =
      reach(spec, model, family.cost_map_at(p, model.state_dim()), opts);
  return monte_carlo_falsify(spec, model, result, trials, horizon, seed, slack);
}

}  // namespace reachdesign
