#include "reachdesign/runner.hpp"

#include <charconv>
#include <fstream>
#include <ostream>
#include <random>
#include <sstream>

#include "reachdesign/json_io.hpp"

namespace reachdesign {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

void write_json(const fs::path& path, const json& doc) {
  write_text(path, doc.dump(2) + "\n");
}

std::string csv_row(const std::vector<std::string>& cells) {
  std::string row;
  for (size_t i = 0; i < cells.size(); ++i) {
    if (i) row += ',';
    row += cells[i];
  }
  row += '\n';
  return row;
}

// Headers name the sampled directions, one column per cardinal direction.
void export_tubes(const ReachResult& result, double dt,
                  const fs::path& out_dir) {
  const Eigen::Index n = result.rho_lx.cols() / 2;
  {
    std::vector<std::string> header = {"step", "time"};
    for (Eigen::Index i = 0; i < n; ++i) {
      header.push_back("rho[+x" + std::to_string(i + 1) + "]");
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      header.push_back("rho[-x" + std::to_string(i + 1) + "]");
    }
    std::string text = csv_row(header);
    for (int k = 0; k <= result.N; ++k) {
      std::vector<std::string> row = {std::to_string(k),
                                      format_double(k * dt)};
      for (Eigen::Index i = 0; i < 2 * n; ++i) {
        row.push_back(format_double(result.rho_lx(k, i)));
      }
      text += csv_row(row);
    }
    write_text(out_dir / "tube_states.csv", text);
  }
  const Eigen::Index m = result.rho_lu.cols() / 2;
  {
    std::vector<std::string> header = {"step", "time"};
    for (Eigen::Index i = 0; i < m; ++i) {
      header.push_back("rho[+u" + std::to_string(i + 1) + "]");
    }
    for (Eigen::Index i = 0; i < m; ++i) {
      header.push_back("rho[-u" + std::to_string(i + 1) + "]");
    }
    std::string text = csv_row(header);
    for (int k = 0; k < result.N; ++k) {
      std::vector<std::string> row = {std::to_string(k),
                                      format_double(k * dt)};
      for (Eigen::Index i = 0; i < 2 * m; ++i) {
        row.push_back(format_double(result.rho_lu(k, i)));
      }
      text += csv_row(row);
    }
    write_text(out_dir / "tube_inputs.csv", text);
  }
}

void export_margins(const ConstraintMargins& margins, const ReachSpec& spec,
                    const ReachResult& result, const Box& bounds, const Vec& p,
                    const fs::path& out_dir) {
  std::string text = csv_row(
      {"kind", "step", "row", "bound", "rho", "margin", "margin_normalized"});
  for (Eigen::Index k = 0; k < margins.safety.rows(); ++k) {
    for (Eigen::Index i = 0; i < margins.safety.cols(); ++i) {
      text += csv_row({"safety", std::to_string(k + 1), std::to_string(i),
                       format_double(spec.X_safe.offsets()(i)),
                       format_double(result.rho_x(k, i)),
                       format_double(margins.safety(k, i)),
                       format_double(margins.safety_norm(k, i))});
    }
  }
  for (Eigen::Index k = 0; k < margins.input.rows(); ++k) {
    for (Eigen::Index i = 0; i < margins.input.cols(); ++i) {
      text += csv_row({"input", std::to_string(k), std::to_string(i),
                       format_double(spec.U_adm.offsets()(i)),
                       format_double(result.rho_u(k, i)),
                       format_double(margins.input(k, i)),
                       format_double(margins.input_norm(k, i))});
    }
  }
  for (Eigen::Index i = 0; i < margins.invariance.size(); ++i) {
    text += csv_row({"invariance", std::to_string(spec.N), std::to_string(i),
                     format_double(spec.R0_poly.offsets()(i)),
                     format_double(result.rho_r(i)),
                     format_double(margins.invariance(i)),
                     format_double(margins.invariance_norm(i))});
  }
  const Eigen::Index np = p.size();
  for (Eigen::Index i = 0; i < margins.realizability.size(); ++i) {
    const bool is_lower = i < np;
    const double bound = is_lower ? bounds.lower(i) : bounds.upper(i - np);
    text += csv_row({"realizability", "-1", std::to_string(i),
                     format_double(bound), format_double(p(i % np)),
                     format_double(margins.realizability(i)),
                     format_double(margins.realizability_norm(i))});
  }
  write_text(out_dir / "margins.csv", text);
}

json margins_to_json(const ConstraintMargins& m) {
  return json{{"feasible", m.feasible},
              {"tolerance", m.tolerance},
              {"min_margin", m.min_margin},
              {"min_margin_normalized", m.min_margin_norm},
              {"worst", m.worst},
              {"safety", to_json(m.safety)},
              {"input", to_json(m.input)},
              {"invariance", to_json(m.invariance)},
              {"realizability", to_json(m.realizability)}};
}

json breakdown_to_json(const CostBreakdown& c) {
  return json{{"total", c.total},
              {"mp", c.mp},
              {"terminal", c.terminal},
              {"running_state", c.running_state},
              {"running_input", c.running_input},
              {"per_step_state", to_json(c.per_step_state)},
              {"per_step_input", to_json(c.per_step_input)}};
}

// Builds the disturbance sequence for cmd_simulate.
Mat build_disturbance(const RunConfig& config, const DiscreteClosedLoop& model,
                      int steps, std::uint64_t seed, Vec* x0_override) {
  const Box& v_box = config.problem.spec.V;
  const Eigen::Index d = v_box.dim();
  const DisturbanceSpec& ds = config.simulate.disturbance;
  Mat v(steps, d);
  switch (ds.kind) {
    case DisturbanceSpec::Kind::kConstant: {
      if (ds.value.size() != d) {
        throw ConfigError("simulate: constant disturbance dimension mismatch");
      }
      v.rowwise() = ds.value.transpose();
      break;
    }
    case DisturbanceSpec::Kind::kPiecewise: {
      int at = 0;
      Vec current = Vec::Zero(d);
      for (const auto& [count, value] : ds.schedule) {
        if (value.size() != d) {
          throw ConfigError("simulate: schedule value dimension mismatch");
        }
        current = value;
        for (int i = 0; i < count && at < steps; ++i) {
          v.row(at++) = current.transpose();
        }
      }
      while (at < steps) v.row(at++) = current.transpose();
      break;
    }
    case DisturbanceSpec::Kind::kUniformRandom: {
      std::mt19937_64 rng(seed);
      for (int k = 0; k < steps; ++k) {
        for (Eigen::Index j = 0; j < d; ++j) {
          v(k, j) = v_box.lower(j) +
                    uniform01(rng) * (v_box.upper(j) - v_box.lower(j));
        }
      }
      break;
    }
    case DisturbanceSpec::Kind::kExtremeVertices: {
      // Worst-case vertex sequence for a target functional l at target step.
      // Defaults pick the (safe-set row, step) whose tube support sits
      // closest to (or furthest past) its bound.
      const ReachSpec& spec = config.problem.spec;
      Vec l;
      int target = std::min(ds.target_step.value_or(steps), steps);
      if (ds.direction) {
        l = *ds.direction;
        if (l.size() != spec.R0.dim()) {
          throw ConfigError("simulate: direction dimension mismatch");
        }
      } else if (spec.X_safe.num_rows() > 0) {
        ReachOptions opts;
        opts.store_tubes = false;
        const ReachResult res =
            reach(spec, model,
                  Mat::Identity(spec.R0.dim(), spec.R0.dim()), opts);
        Eigen::Index worst_row = 0;
        int worst_step = 1;
        double worst = -std::numeric_limits<double>::infinity();
        for (int k = 1; k <= std::min(steps, spec.N); ++k) {
          for (Eigen::Index i = 0; i < spec.X_safe.num_rows(); ++i) {
            const double excess =
                res.rho_x(k - 1, i) - spec.X_safe.offsets()(i);
            if (excess > worst) {
              worst = excess;
              worst_row = i;
              worst_step = k;
            }
          }
        }
        l = spec.X_safe.normals().row(worst_row).transpose();
        if (!ds.target_step) target = worst_step;
      } else {
        l = Vec::Unit(spec.R0.dim(), 0);
      }
      const Vec half_v = v_box.half_widths();
      Vec w = l;
      v.rowwise() = v_box.center().transpose();
      for (int j = target - 1; j >= 0; --j) {
        const Vec wv = model.Ed.transpose() * w;
        v.row(j) = (v_box.center() +
                    wv.array().sign().matrix().cwiseProduct(half_v))
                       .transpose();
        w = model.Ad.transpose() * w;
      }
      if (x0_override) {
        *x0_override = spec.R0.center() +
                       w.array().sign().matrix().cwiseProduct(
                           spec.R0.half_widths());
      }
      break;
    }
  }
  return v;
}

// Reads a tube export back for the containment column; returns false when
// absent or incompatible.
bool load_tube(const fs::path& path, Eigen::Index n, Mat* rho) {
  std::ifstream in(path);
  if (!in) return false;
  std::string line;
  if (!std::getline(in, line)) return false;
  std::vector<Vec> rows;
  while (std::getline(in, line)) {
    std::vector<double> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      double value = 0.0;
      const auto res =
          std::from_chars(cell.data(), cell.data() + cell.size(), value);
      if (res.ec != std::errc()) return false;
      cells.push_back(value);
    }
    if (static_cast<Eigen::Index>(cells.size()) != 2 * n + 2) return false;
    Vec row(2 * n);
    for (Eigen::Index i = 0; i < 2 * n; ++i) {
      row(i) = cells[static_cast<size_t>(i) + 2];
    }
    rows.push_back(row);
  }
  if (rows.empty()) return false;
  rho->resize(static_cast<Eigen::Index>(rows.size()), 2 * n);
  for (size_t i = 0; i < rows.size(); ++i) {
    rho->row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
  }
  return true;
}

void apply_overrides(RunConfig& config, const CliOverrides& overrides) {
  if (overrides.seed) {
    config.seed = *overrides.seed;
    config.solver.seed = *overrides.seed;
  }
  if (overrides.starts) {
    if (*overrides.starts < 1) throw ConfigError("--starts must be >= 1");
    config.solver.multistarts = *overrides.starts;
  }
}

ReachResult reach_fixed(const RunConfig& config, const Vec& p) {
  ReachOptions opts;
  opts.store_tubes = config.store_tubes;
  opts.max_generators = config.max_generators;
  return reach(config.problem.spec, config.problem.family.build(p),
               config.problem.cost_map_at(p), opts);
}

}  // namespace

std::string format_double(double value) {
  char buffer[64];
  const auto res = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, res.ptr);
}

int run_codesign(RunConfig config, const fs::path& out_dir,
                 const CliOverrides& overrides, std::ostream& log) {
  apply_overrides(config, overrides);
  fs::create_directories(out_dir);

  const OptimizationReport report = solve(config.problem, config.solver);

  json rj;
  rj["model"] = config.model_name;
  rj["seed"] = config.seed;
  rj["p_star"] = to_json(report.p_star);
  rj["labels"] = config.problem.family.labels;
  rj["feasible"] = report.feasible;
  rj["cost"] = breakdown_to_json(report.cost);
  rj["margins"] = margins_to_json(report.margins);
  rj["iterations"] = report.iterations;
  rj["evaluation_count"] = report.evaluation_count;
  rj["starts"] = json::array();
  for (const StartSummary& s : report.starts) {
    rj["starts"].push_back(json{{"index", s.index},
                                {"p0", to_json(s.p0)},
                                {"p_star", to_json(s.p_star)},
                                {"cost", s.cost},
                                {"max_violation", s.max_violation},
                                {"feasible", s.feasible},
                                {"iterations", s.iterations},
                                {"evaluations", s.evaluations},
                                {"used_fallback", s.used_fallback}});
  }
  write_json(out_dir / "report.json", rj);

  {
    std::string text =
        csv_row({"start", "iteration", "cost", "max_violation",
                 "evaluations"});
    for (const TraceEntry& t : report.trace) {
      text += csv_row({std::to_string(t.start), std::to_string(t.iteration),
                       format_double(t.cost), format_double(t.max_violation),
                       std::to_string(t.evaluations)});
    }
    write_text(out_dir / "trace.csv", text);
  }

  log << "codesign: " << (report.feasible ? "feasible" : "NO FEASIBLE POINT")
      << ", cost " << report.cost.total << ", " << report.evaluation_count
      << " evaluations, wall time " << report.wall_time_s << " s\n";

  try {
    const DiscreteClosedLoop model =
        config.problem.family.build(report.p_star);
    const ReachResult result = reach_fixed(config, report.p_star);
    export_tubes(result, model.dt, out_dir);
    if (report.feasible) {
      const json cert = certificate(result, config.problem.spec, model,
                                    report.margins, report.p_star);
      write_json(out_dir / "certificate.json", cert);
    }
  } catch (const UnstableCandidateError&) {
    log << "codesign: least-infeasible candidate is unstable; tube export "
           "skipped\n";
  }
  return report.feasible ? 0 : 3;
}

int run_verify(RunConfig config, const fs::path& out_dir,
               const CliOverrides& overrides, std::ostream& log) {
  apply_overrides(config, overrides);
  if (!config.fixed_design) {
    throw ConfigError("verify: design.p (a fixed design vector) is required");
  }
  fs::create_directories(out_dir);
  const Vec p = *config.fixed_design;

  DiscreteClosedLoop model;
  ReachResult result;
  try {
    model = config.problem.family.build(p);
    result = reach_fixed(config, p);
  } catch (const UnstableCandidateError& e) {
    log << "verify: unstable candidate (" << e.what()
        << "); reported as unsafe\n";
    return 4;
  }
  const ConstraintMargins margins =
      evaluate(result, config.problem.spec, config.problem.family.bounds, p,
               config.solver.constraint_tolerance);

  export_tubes(result, model.dt, out_dir);
  export_margins(margins, config.problem.spec, result,
                 config.problem.family.bounds, p, out_dir);

  const FalsifyReport falsify = monte_carlo_falsify(
      config.problem.spec, model, result, 10000, config.problem.spec.N,
      config.seed);

  const double safety_min = margins.safety.size()
                                ? margins.safety.minCoeff()
                                : 0.0;
  const bool safety_ok =
      safety_min >= -margins.tolerance && falsify.safety_violations == 0;

  log << "verify: min safety margin " << safety_min << ", min margin ("
      << margins.worst << ") " << margins.min_margin
      << ", falsification: " << falsify.tube_violations << " tube / "
      << falsify.safety_violations << " safety violations over "
      << falsify.trials << " trials\n";

  if (!safety_ok) return 4;
  if (!margins.feasible) return 5;

  const json cert =
      certificate(result, config.problem.spec, model, margins, p);
  write_json(out_dir / "certificate.json", cert);
  return 0;
}

int run_simulate(RunConfig config, const fs::path& out_dir,
                 const CliOverrides& overrides, std::ostream& log) {
  apply_overrides(config, overrides);
  if (!config.fixed_design) {
    throw ConfigError("simulate: design.p (a fixed design vector) is required");
  }
  fs::create_directories(out_dir);
  const Vec p = *config.fixed_design;
  const DiscreteClosedLoop model = config.problem.family.build(p);

  const int steps = config.simulate.steps > 0 ? config.simulate.steps
                                              : config.problem.spec.N;
  Vec x0 = config.simulate.x0.value_or(config.problem.spec.R0.center());
  Vec witness_x0;
  const Mat v_seq =
      build_disturbance(config, model, steps, config.seed,
                        config.simulate.disturbance.kind ==
                                DisturbanceSpec::Kind::kExtremeVertices
                            ? &witness_x0
                            : nullptr);
  if (witness_x0.size() && !config.simulate.x0) x0 = witness_x0;
  if (x0.size() != model.state_dim()) {
    throw ConfigError("simulate: x0 dimension mismatch");
  }

  const SimResult sim = simulate(model, x0, v_seq);

  // Optional containment column from a previously exported tube.
  Mat tube;
  const bool have_tube =
      load_tube(out_dir / "tube_states.csv", model.state_dim(), &tube);

  const Eigen::Index n = model.state_dim();
  const Eigen::Index m = model.input_dim();
  std::vector<std::string> header = {"step", "time"};
  for (Eigen::Index i = 0; i < n; ++i) header.push_back("x" + std::to_string(i + 1));
  for (Eigen::Index i = 0; i < m; ++i) header.push_back("u" + std::to_string(i + 1));
  if (have_tube) header.push_back("contained");
  std::string text = csv_row(header);
  for (Eigen::Index k = 0; k <= steps; ++k) {
    std::vector<std::string> row = {std::to_string(k),
                                    format_double(k * model.dt)};
    for (Eigen::Index i = 0; i < n; ++i) {
      row.push_back(format_double(sim.states(k, i)));
    }
    for (Eigen::Index i = 0; i < m; ++i) {
      row.push_back(k < steps ? format_double(sim.inputs(k, i)) : "");
    }
    if (have_tube) {
      if (k < tube.rows()) {
        bool inside = true;
        for (Eigen::Index i = 0; i < n; ++i) {
          if (sim.states(k, i) > tube(k, i) + 1e-9 ||
              -sim.states(k, i) > tube(k, n + i) + 1e-9) {
            inside = false;
          }
        }
        row.push_back(inside ? "1" : "0");
      } else {
        row.push_back("");
      }
    }
    text += csv_row(row);
  }
  write_text(out_dir / "trajectory.csv", text);

  log << "simulate: " << steps << " steps written"
      << (have_tube ? " with containment flags" : "") << "\n";
  return 0;
}

}  // namespace reachdesign
