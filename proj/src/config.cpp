#include "reachdesign/config.hpp"

#include <fstream>
#include <set>

#include "reachdesign/json_io.hpp"

namespace reachdesign {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& msg) { throw ConfigError(msg); }

void check_keys(const json& obj, const std::set<std::string>& allowed,
                const std::string& context) {
  if (!obj.is_object()) fail(context + ": expected an object");
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.count(key)) {
      fail(context + ": unknown key '" + key + "'");
    }
  }
}

double get_number(const json& obj, const char* key, double fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj.at(key).is_number()) fail(std::string(key) + ": expected a number");
  return obj.at(key).get<double>();
}

int get_int(const json& obj, const char* key, int fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj.at(key).is_number_integer()) {
    fail(std::string(key) + ": expected an integer");
  }
  return obj.at(key).get<int>();
}

bool get_bool(const json& obj, const char* key, bool fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj.at(key).is_boolean()) fail(std::string(key) + ": expected a bool");
  return obj.at(key).get<bool>();
}

Vec get_vec(const json& obj, const char* key) {
  try {
    return vec_from_json(obj.at(key), key);
  } catch (const std::invalid_argument& e) {
    fail(e.what());
  }
}

Box parse_box(const json& j, const std::string& context) {
  check_keys(j, {"lower", "upper"}, context);
  if (!j.contains("lower") || !j.contains("upper")) {
    fail(context + ": needs 'lower' and 'upper'");
  }
  try {
    return Box(get_vec(j, "lower"), get_vec(j, "upper"));
  } catch (const std::invalid_argument& e) {
    fail(context + ": " + e.what());
  }
}

HPolytope parse_polytope(const json& j, const std::string& context) {
  check_keys(j, {"H", "f"}, context);
  if (!j.contains("H") || !j.contains("f")) {
    fail(context + ": needs 'H' and 'f'");
  }
  try {
    return HPolytope(mat_from_json(j.at("H"), "H"), get_vec(j, "f"));
  } catch (const std::invalid_argument& e) {
    fail(context + ": " + e.what());
  }
}

CoDesignProblem build_model(const std::string& name, const json& params,
                            const json& spec_overrides) {
  const int n_override = get_int(spec_overrides, "N", 0);
  const double dt_override = get_number(spec_overrides, "dt", 0.0);

  if (name == "active_suspension") {
    check_keys(params, {"k_t", "m_s", "m_us", "dt", "N",
                        "disturbance_discretization"},
               "model.params");
    SuspensionParams sp;
    sp.k_t = get_number(params, "k_t", sp.k_t);
    sp.m_s = get_number(params, "m_s", sp.m_s);
    sp.m_us = get_number(params, "m_us", sp.m_us);
    sp.dt = get_number(params, "dt", sp.dt);
    sp.N = get_int(params, "N", sp.N);
    if (dt_override > 0) sp.dt = dt_override;
    if (n_override > 0) sp.N = n_override;
    if (params.contains("disturbance_discretization")) {
      const std::string conv = params.at("disturbance_discretization");
      if (conv == "exact") {
        sp.disturbance = DisturbanceDiscretization::kExact;
      } else if (conv == "euler") {
        sp.disturbance = DisturbanceDiscretization::kEuler;
      } else {
        fail("disturbance_discretization: expected 'exact' or 'euler'");
      }
    }
    try {
      return build_active_suspension(sp);
    } catch (const std::invalid_argument& e) {
      fail(std::string("active_suspension: ") + e.what());
    }
  }

  if (name == "tms_subsystem") {
    check_keys(params,
               {"C_cp_w", "C_cp_f", "C_hx_w", "C_hx_f", "alphaA_cp",
                "alphaA_hx", "alphaA_hx_s", "c_p", "mdot_p", "mdot_s", "T_s",
                "Q_cp_bounds", "T_tf_bounds", "design_bounds",
                "operating_region", "safe_set", "mass_weight", "dt", "N"},
               "model.params");
    TmsParams tp;
    tp.C_cp_w = get_number(params, "C_cp_w", 0.0);
    tp.C_cp_f = get_number(params, "C_cp_f", 0.0);
    tp.C_hx_w = get_number(params, "C_hx_w", 0.0);
    tp.C_hx_f = get_number(params, "C_hx_f", 0.0);
    tp.alphaA_cp = get_number(params, "alphaA_cp", 0.0);
    tp.alphaA_hx = get_number(params, "alphaA_hx", 0.0);
    tp.alphaA_hx_s = get_number(params, "alphaA_hx_s", 0.0);
    tp.c_p = get_number(params, "c_p", 0.0);
    tp.mdot_p = get_number(params, "mdot_p", 0.0);
    tp.mdot_s = get_number(params, "mdot_s", 0.0);
    tp.T_s = get_number(params, "T_s", 0.0);
    if (params.contains("Q_cp_bounds")) {
      const Vec b = get_vec(params, "Q_cp_bounds");
      if (b.size() != 2) fail("Q_cp_bounds: expected [min, max]");
      tp.Q_cp_min = b(0);
      tp.Q_cp_max = b(1);
    }
    if (params.contains("T_tf_bounds")) {
      const Vec b = get_vec(params, "T_tf_bounds");
      if (b.size() != 2) fail("T_tf_bounds: expected [min, max]");
      tp.T_tf_min = b(0);
      tp.T_tf_max = b(1);
    }
    TmsProblemConfig cfg;
    if (!params.contains("design_bounds") ||
        !params.contains("operating_region") || !params.contains("safe_set")) {
      fail("tms_subsystem: design_bounds, operating_region and safe_set are "
           "required");
    }
    cfg.design_bounds = parse_box(params.at("design_bounds"), "design_bounds");
    cfg.operating_region =
        parse_box(params.at("operating_region"), "operating_region");
    cfg.safe_set = parse_polytope(params.at("safe_set"), "safe_set");
    cfg.mass_weight = get_number(params, "mass_weight", 0.0);
    cfg.dt = get_number(params, "dt", cfg.dt);
    cfg.N = get_int(params, "N", cfg.N);
    if (dt_override > 0) cfg.dt = dt_override;
    if (n_override > 0) cfg.N = n_override;
    try {
      return build_tms_problem(tp, cfg);
    } catch (const std::invalid_argument& e) {
      fail(std::string("tms_subsystem: ") + e.what());
    }
  }

  if (name == "toy_frozen") {
    check_keys(params, {"state_dim", "N", "bounds", "mp_weights"},
               "model.params");
    ToyFrozenConfig cfg;
    cfg.state_dim = get_int(params, "state_dim", cfg.state_dim);
    cfg.N = get_int(params, "N", cfg.N);
    if (n_override > 0) cfg.N = n_override;
    if (params.contains("bounds")) {
      cfg.design_bounds = parse_box(params.at("bounds"), "bounds");
    }
    if (params.contains("mp_weights")) {
      cfg.mp_weights = get_vec(params, "mp_weights");
    }
    if (cfg.mp_weights.size() != cfg.design_bounds.dim()) {
      fail("toy_frozen: mp_weights must match the bounds dimension");
    }
    try {
      return build_toy_frozen(cfg);
    } catch (const std::invalid_argument& e) {
      fail(std::string("toy_frozen: ") + e.what());
    }
  }

  if (name == "toy_contraction") {
    check_keys(params, {"N", "p_min", "p_max"}, "model.params");
    ToyContractionConfig cfg;
    cfg.N = get_int(params, "N", cfg.N);
    if (n_override > 0) cfg.N = n_override;
    cfg.p_min = get_number(params, "p_min", cfg.p_min);
    cfg.p_max = get_number(params, "p_max", cfg.p_max);
    try {
      return build_toy_contraction(cfg);
    } catch (const std::invalid_argument& e) {
      fail(std::string("toy_contraction: ") + e.what());
    }
  }

  fail("model.name: unknown model '" + name + "'");
}

}  // namespace

RunConfig parse_config(const json& doc) {
  if (!doc.is_object()) fail("config: expected a JSON object");
  check_keys(doc,
             {"version", "seed", "model", "design", "spec", "cost", "solver",
              "simulate"},
             "config");
  if (get_int(doc, "version", 0) != 1) fail("config: version must be 1");
  if (!doc.contains("model")) fail("config: 'model' is required");

  RunConfig cfg;
  cfg.raw = doc;
  if (doc.contains("seed")) {
    if (!doc.at("seed").is_number_unsigned()) {
      fail("seed: expected a nonnegative integer");
    }
    cfg.seed = doc.at("seed").get<std::uint64_t>();
  }

  const json& model = doc.at("model");
  check_keys(model, {"name", "params"}, "model");
  if (!model.contains("name") || !model.at("name").is_string()) {
    fail("model.name: expected a string");
  }
  cfg.model_name = model.at("name").get<std::string>();
  const json params =
      model.contains("params") ? model.at("params") : json::object();
  const json spec_overrides =
      doc.contains("spec") ? doc.at("spec") : json::object();
  check_keys(spec_overrides,
             {"N", "dt", "operating_region", "disturbance", "safe_set",
              "admissible_inputs", "store_tubes", "max_generators"},
             "spec");

  cfg.problem = build_model(cfg.model_name, params, spec_overrides);

  // Geometry overrides rebuild the reach spec.
  {
    Box r0 = spec_overrides.contains("operating_region")
                 ? parse_box(spec_overrides.at("operating_region"),
                             "spec.operating_region")
                 : cfg.problem.spec.R0;
    Box v = spec_overrides.contains("disturbance")
                ? parse_box(spec_overrides.at("disturbance"),
                            "spec.disturbance")
                : cfg.problem.spec.V;
    HPolytope x_safe =
        spec_overrides.contains("safe_set")
            ? parse_polytope(spec_overrides.at("safe_set"), "spec.safe_set")
            : cfg.problem.spec.X_safe;
    HPolytope u_adm = spec_overrides.contains("admissible_inputs")
                          ? parse_polytope(spec_overrides.at("admissible_inputs"),
                                           "spec.admissible_inputs")
                          : cfg.problem.spec.U_adm;
    try {
      cfg.problem.spec = ReachSpec(std::move(r0), std::move(v),
                                   cfg.problem.spec.N, std::move(x_safe),
                                   std::move(u_adm));
    } catch (const std::invalid_argument& e) {
      fail(std::string("spec: ") + e.what());
    }
    cfg.store_tubes = get_bool(spec_overrides, "store_tubes", true);
    cfg.max_generators = get_int(spec_overrides, "max_generators", 0);
    if (cfg.max_generators < 0) fail("spec.max_generators: must be >= 0");
  }

  if (doc.contains("design")) {
    const json& design = doc.at("design");
    check_keys(design, {"p", "bounds"}, "design");
    if (design.contains("p")) cfg.fixed_design = get_vec(design, "p");
    if (design.contains("bounds")) {
      Box bounds = parse_box(design.at("bounds"), "design.bounds");
      if (bounds.dim() != cfg.problem.family.bounds.dim()) {
        fail("design.bounds: dimension does not match the model");
      }
      cfg.problem.family.bounds = std::move(bounds);
    }
    if (cfg.fixed_design &&
        cfg.fixed_design->size() != cfg.problem.family.bounds.dim()) {
      fail("design.p: dimension does not match the model");
    }
  }

  if (doc.contains("cost")) {
    const json& cost = doc.at("cost");
    check_keys(cost,
               {"gamma1", "gamma2", "gamma3", "x_ref", "u_ref", "mp_weights",
                "Q"},
               "cost");
    CostSpec& cs = cfg.problem.cost;
    cs.gamma1 = get_number(cost, "gamma1", cs.gamma1);
    cs.gamma2 = get_number(cost, "gamma2", cs.gamma2);
    cs.gamma3 = get_number(cost, "gamma3", cs.gamma3);
    if (cs.gamma1 < 0 || cs.gamma2 < 0 || cs.gamma3 < 0) {
      fail("cost: weights must be nonnegative");
    }
    if (cost.contains("x_ref")) cs.x_ref = get_vec(cost, "x_ref");
    if (cost.contains("u_ref")) cs.u_ref = get_vec(cost, "u_ref");
    if (cost.contains("mp_weights")) {
      cs.mp_weights = get_vec(cost, "mp_weights");
      if (cs.mp_weights.size() != cfg.problem.family.bounds.dim()) {
        fail("cost.mp_weights: dimension does not match the design vector");
      }
    }
    if (cost.contains("Q")) {
      try {
        cs.Q = mat_from_json(cost.at("Q"), "cost.Q");
      } catch (const std::invalid_argument& e) {
        fail(e.what());
      }
      if (cs.Q.cols() != cfg.problem.spec.R0.dim()) {
        fail("cost.Q: column count must match the state dimension");
      }
      cfg.problem.family.cost_map = nullptr;  // static Q replaces the builder map
      if (cs.x_ref.size() == 0) cs.x_ref = Vec::Zero(cs.Q.rows());
      if (cs.x_ref.size() != cs.Q.rows()) {
        fail("cost.x_ref: dimension must match the rows of Q");
      }
    }
  }

  if (doc.contains("solver")) {
    const json& solver = doc.at("solver");
    check_keys(solver,
               {"multistarts", "max_iterations", "fd_step",
                "constraint_tolerance", "stall_cost_change",
                "stall_iterations", "trust_initial", "start_violation_cap",
                "nm_fallback", "nm_max_evals", "penalty_ceiling",
                "max_threads"},
               "solver");
    SolverOptions& so = cfg.solver;
    so.multistarts = get_int(solver, "multistarts", so.multistarts);
    so.max_iterations = get_int(solver, "max_iterations", so.max_iterations);
    so.fd_step = get_number(solver, "fd_step", so.fd_step);
    so.constraint_tolerance =
        get_number(solver, "constraint_tolerance", so.constraint_tolerance);
    so.stall_cost_change =
        get_number(solver, "stall_cost_change", so.stall_cost_change);
    so.stall_iterations =
        get_int(solver, "stall_iterations", so.stall_iterations);
    so.trust_initial = get_number(solver, "trust_initial", so.trust_initial);
    so.start_violation_cap =
        get_number(solver, "start_violation_cap", so.start_violation_cap);
    so.nm_fallback = get_bool(solver, "nm_fallback", so.nm_fallback);
    so.nm_max_evals = get_int(solver, "nm_max_evals",
                              static_cast<int>(so.nm_max_evals));
    so.penalty_ceiling =
        get_number(solver, "penalty_ceiling", so.penalty_ceiling);
    so.max_threads = get_int(solver, "max_threads", so.max_threads);
    if (so.multistarts < 1 || so.max_iterations < 1 || so.fd_step <= 0 ||
        so.constraint_tolerance <= 0 || so.trust_initial <= 0) {
      fail("solver: limits and steps must be positive");
    }
  }
  cfg.solver.seed = cfg.seed;

  if (doc.contains("simulate")) {
    const json& sim = doc.at("simulate");
    check_keys(sim, {"steps", "x0", "disturbance"}, "simulate");
    cfg.simulate.steps = get_int(sim, "steps", 0);
    if (cfg.simulate.steps < 0) fail("simulate.steps: must be >= 0");
    if (sim.contains("x0")) cfg.simulate.x0 = get_vec(sim, "x0");
    if (sim.contains("disturbance")) {
      const json& dist = sim.at("disturbance");
      check_keys(dist, {"kind", "value", "schedule", "direction",
                        "target_step"},
                 "simulate.disturbance");
      if (!dist.contains("kind") || !dist.at("kind").is_string()) {
        fail("simulate.disturbance.kind: expected a string");
      }
      const std::string kind = dist.at("kind").get<std::string>();
      DisturbanceSpec& ds = cfg.simulate.disturbance;
      if (kind == "constant") {
        ds.kind = DisturbanceSpec::Kind::kConstant;
        if (!dist.contains("value")) fail("constant disturbance needs 'value'");
        ds.value = get_vec(dist, "value");
      } else if (kind == "piecewise") {
        ds.kind = DisturbanceSpec::Kind::kPiecewise;
        if (!dist.contains("schedule") || !dist.at("schedule").is_array() ||
            dist.at("schedule").empty()) {
          fail("piecewise disturbance needs a nonempty 'schedule'");
        }
        for (const auto& entry : dist.at("schedule")) {
          check_keys(entry, {"steps", "value"}, "schedule entry");
          const int steps = get_int(entry, "steps", 0);
          if (steps < 1) fail("schedule entry: steps must be >= 1");
          ds.schedule.emplace_back(steps, get_vec(entry, "value"));
        }
      } else if (kind == "uniform_random") {
        ds.kind = DisturbanceSpec::Kind::kUniformRandom;
      } else if (kind == "extreme_vertices") {
        ds.kind = DisturbanceSpec::Kind::kExtremeVertices;
        if (dist.contains("direction")) {
          ds.direction = get_vec(dist, "direction");
        }
        if (dist.contains("target_step")) {
          ds.target_step = get_int(dist, "target_step", 0);
        }
      } else {
        fail("simulate.disturbance.kind: unknown kind '" + kind + "'");
      }
    }
  }

  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail("config: cannot open " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::parse_error& e) {
    fail(std::string("config: JSON parse error: ") + e.what());
  }
  return parse_config(doc);
}

nlohmann::json serialize_config(const RunConfig& config) { return config.raw; }

}  // namespace reachdesign
