#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "reachdesign/benchmarks.hpp"
#include "reachdesign/runner.hpp"

namespace py = pybind11;
using namespace reachdesign;

PYBIND11_MODULE(_core, m) {
  m.doc() = "Set-based robust control co-design core";

  py::register_exception<UnstableCandidateError>(m, "UnstableCandidateError");
  py::register_exception<ConfigError>(m, "ConfigError");

  py::class_<Zonotope>(m, "Zonotope")
      .def(py::init<Vec, Mat>(), py::arg("center"), py::arg("generators"))
      .def_static("singleton", &Zonotope::singleton)
      .def_property_readonly("center", &Zonotope::center)
      .def_property_readonly("generators", &Zonotope::generators)
      .def("dim", &Zonotope::dim)
      .def("num_generators", &Zonotope::num_generators)
      .def("support", &Zonotope::support, py::arg("direction"));

  py::class_<HPolytope>(m, "HPolytope")
      .def(py::init<Mat, Vec>(), py::arg("normals"), py::arg("offsets"))
      .def_property_readonly("normals", &HPolytope::normals)
      .def_property_readonly("offsets", &HPolytope::offsets)
      .def("contains", &HPolytope::contains, py::arg("x"),
           py::arg("tol") = kDefaultTol);

  py::class_<Box>(m, "Box")
      .def(py::init<Vec, Vec>(), py::arg("lower"), py::arg("upper"))
      .def_readonly("lower", &Box::lower)
      .def_readonly("upper", &Box::upper)
      .def("to_zonotope", &Box::to_zonotope)
      .def("to_hpolytope", &Box::to_hpolytope);

  m.def("linear_map", &linear_map);
  m.def("minkowski_sum", &minkowski_sum);
  m.def("support",
        [](const Zonotope& z, const Vec& l) { return z.support(l); });

  py::class_<DiscreteClosedLoop>(m, "DiscreteClosedLoop")
      .def_readonly("Ad", &DiscreteClosedLoop::Ad)
      .def_readonly("Ed", &DiscreteClosedLoop::Ed)
      .def_readonly("K", &DiscreteClosedLoop::K)
      .def_readonly("dt", &DiscreteClosedLoop::dt);

  py::class_<ReachResult>(m, "ReachResult")
      .def_readonly("N", &ReachResult::N)
      .def_readonly("rho_lx", &ReachResult::rho_lx)
      .def_readonly("rho_qx", &ReachResult::rho_qx)
      .def_readonly("rho_x", &ReachResult::rho_x)
      .def_readonly("rho_lu", &ReachResult::rho_lu)
      .def_readonly("rho_u", &ReachResult::rho_u)
      .def_readonly("rho_r", &ReachResult::rho_r);

  py::class_<ConstraintMargins>(m, "ConstraintMargins")
      .def_readonly("safety", &ConstraintMargins::safety)
      .def_readonly("input", &ConstraintMargins::input)
      .def_readonly("invariance", &ConstraintMargins::invariance)
      .def_readonly("realizability", &ConstraintMargins::realizability)
      .def_readonly("feasible", &ConstraintMargins::feasible)
      .def_readonly("min_margin", &ConstraintMargins::min_margin)
      .def_readonly("worst", &ConstraintMargins::worst);

  py::class_<CostBreakdown>(m, "CostBreakdown")
      .def_readonly("total", &CostBreakdown::total)
      .def_readonly("mp", &CostBreakdown::mp)
      .def_readonly("terminal", &CostBreakdown::terminal)
      .def_readonly("running_state", &CostBreakdown::running_state)
      .def_readonly("running_input", &CostBreakdown::running_input);

  py::class_<CandidateEval>(m, "CandidateEval")
      .def_readonly("cost", &CandidateEval::cost)
      .def_readonly("margins", &CandidateEval::margins)
      .def_readonly("stable", &CandidateEval::stable);

  py::class_<CoDesignProblem>(m, "CoDesignProblem")
      .def("design_dim",
           [](const CoDesignProblem& p) { return p.family.bounds.dim(); })
      .def("reach",
           [](const CoDesignProblem& problem, const Vec& p) {
             return reach(problem.spec, problem.family.build(p),
                          problem.cost_map_at(p));
           })
      .def("evaluate",
           [](const CoDesignProblem& problem, const Vec& p) {
             return evaluate_candidate(problem, p);
           });

  py::class_<SolverOptions>(m, "SolverOptions")
      .def(py::init<>())
      .def_readwrite("max_iterations", &SolverOptions::max_iterations)
      .def_readwrite("multistarts", &SolverOptions::multistarts)
      .def_readwrite("seed", &SolverOptions::seed)
      .def_readwrite("nm_fallback", &SolverOptions::nm_fallback)
      .def_readwrite("max_threads", &SolverOptions::max_threads);

  py::class_<OptimizationReport>(m, "OptimizationReport")
      .def_readonly("p_star", &OptimizationReport::p_star)
      .def_readonly("feasible", &OptimizationReport::feasible)
      .def_readonly("cost", &OptimizationReport::cost)
      .def_readonly("margins", &OptimizationReport::margins)
      .def_readonly("evaluation_count", &OptimizationReport::evaluation_count)
      .def_readonly("wall_time_s", &OptimizationReport::wall_time_s);

  m.def("solve", &solve, py::arg("problem"),
        py::arg("options") = SolverOptions{},
        py::call_guard<py::gil_scoped_release>());

  py::class_<SuspensionParams>(m, "SuspensionParams")
      .def(py::init<>())
      .def_readwrite("k_t", &SuspensionParams::k_t)
      .def_readwrite("m_s", &SuspensionParams::m_s)
      .def_readwrite("m_us", &SuspensionParams::m_us)
      .def_readwrite("dt", &SuspensionParams::dt)
      .def_readwrite("N", &SuspensionParams::N);

  m.def("build_active_suspension",
        [](const SuspensionParams& p) { return build_active_suspension(p); },
        py::arg("params") = SuspensionParams{});
  m.def("build_toy_contraction", [](int n_steps) {
    ToyContractionConfig cfg;
    cfg.N = n_steps;
    return build_toy_contraction(cfg);
  });

  m.def("run_from_config",
        [](const std::string& command, const std::string& config_json,
           const std::string& out_dir, std::uint64_t seed) {
          nlohmann::json doc = nlohmann::json::parse(config_json);
          RunConfig config = parse_config(doc);
          CliOverrides overrides;
          overrides.seed = seed;
          std::ostringstream log;
          int code = 0;
          if (command == "codesign") {
            code = run_codesign(std::move(config), out_dir, overrides, log);
          } else if (command == "verify") {
            code = run_verify(std::move(config), out_dir, overrides, log);
          } else if (command == "simulate") {
            code = run_simulate(std::move(config), out_dir, overrides, log);
          } else {
            throw std::invalid_argument("unknown command: " + command);
          }
          return py::make_tuple(code, log.str());
        },
        py::arg("command"), py::arg("config_json"), py::arg("out_dir"),
        py::arg("seed") = 0);
}
