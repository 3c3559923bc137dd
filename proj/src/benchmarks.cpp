#include "reachdesign/benchmarks.hpp"

#include <cmath>

namespace reachdesign {

namespace {

void require(bool cond, const char* msg) {
  if (!cond) throw std::invalid_argument(msg);
}

Vec vec4(double a, double b, double c, double d) {
  Vec v(4);
  v << a, b, c, d;
  return v;
}

}  // namespace

ContinuousLti suspension_continuous(const SuspensionParams& params, double k_s,
                                    double c_s) {
  require(params.k_t > 0 && params.m_s > 0 && params.m_us > 0,
          "suspension: constants must be positive");
  require(k_s > 0 && c_s > 0, "suspension: k_s and c_s must be positive");
  ContinuousLti sys;
  sys.A.resize(4, 4);
  sys.A << 0, 1, 0, 0,                                                  //
      -params.k_t / params.m_us, -c_s / params.m_us, k_s / params.m_us,
      c_s / params.m_us,                                                //
      0, -1, 0, 1,                                                      //
      0, c_s / params.m_s, -k_s / params.m_s, -c_s / params.m_s;
  sys.B.resize(4, 1);
  sys.B << 0, -1.0 / params.m_us, 0, 1.0 / params.m_s;
  sys.E.resize(4, 1);
  sys.E << -1, 0, 0, 0;
  return sys;
}

Mat suspension_cost_map(const SuspensionParams& params, double k_s,
                        double c_s) {
  Mat q(2, 4);
  q << 1e5, 0, 0, 0,  //
      0, 0.5 * c_s / params.m_s, -0.5 * k_s / params.m_s,
      -0.5 * c_s / params.m_s;
  return q;
}

CoDesignProblem build_active_suspension(const SuspensionParams& params) {
  Box r0(vec4(-0.25, -0.75, -0.25, -0.75), vec4(0.25, 0.75, 0.25, 0.75));
  Box v((Vec(1) << -0.2).finished(), (Vec(1) << 0.2).finished());

  // Travel constraint |z_s - z_us| <= 0.5 m; other states unconstrained.
  Mat hx(2, 4);
  hx << 0, 0, 1, 0, 0, 0, -1, 0;
  HPolytope x_safe(hx, (Vec(2) << 0.5, 0.5).finished());

  Mat hu(2, 1);
  hu << 1, -1;
  HPolytope u_adm(hu, (Vec(2) << 4000.0, 4000.0).finished());

  SystemFamily family;
  family.bounds = Box(
      (Vec(6) << 1e4, 1e3, -1e6, -1e6, -1e6, -1e6).finished(),
      (Vec(6) << 1e5, 1e4, 1e6, 1e6, 1e6, 1e6).finished());
  family.labels = {"k_s [N/m]",   "c_s [N s/m]", "p_c1 [N/m]",
                   "p_c2 [N s/m]", "p_c3 [N/m]", "p_c4 [N s/m]"};
  family.build = [params](const Vec& p) {
    require(p.size() == 6, "suspension: design vector must have 6 components");
    const ContinuousLti sys = suspension_continuous(params, p(0), p(1));
    Mat gain(1, 4);
    gain << p(2), p(3), p(4), p(5);
    return zoh_discretize(sys, gain, params.dt, params.disturbance);
  };
  family.cost_map = [params](const Vec& p) {
    return suspension_cost_map(params, p(0), p(1));
  };

  CostSpec cost;
  cost.x_ref = Vec::Zero(2);
  cost.u_ref = Vec::Zero(1);
  cost.gamma1 = 1.0;
  cost.gamma2 = 1.0;
  cost.gamma3 = 1e-5;
  cost.mp_weights = (Vec(6) << 1e-2, 1e-1, 0, 0, 0, 0).finished();

  return CoDesignProblem{std::move(family),
                         ReachSpec(std::move(r0), std::move(v), params.N,
                                   std::move(x_safe), std::move(u_adm)),
                         std::move(cost)};
}

double ntu_coefficient(double alphaA_hx_s, double c_p, double mdot_s) {
  require(c_p > 0 && mdot_s > 0, "ntu: c_p and mdot_s must be positive");
  require(alphaA_hx_s >= 0, "ntu: conductance must be nonnegative");
  return c_p * mdot_s * (std::exp(-alphaA_hx_s / (c_p * mdot_s)) - 1.0);
}

ContinuousLti build_tms_subsystem(const TmsParams& p) {
  require(p.C_cp_w > 0 && p.C_cp_f > 0 && p.C_hx_w > 0 && p.C_hx_f > 0,
          "tms: capacitances must be positive");
  require(p.alphaA_cp > 0 && p.alphaA_hx > 0 && p.alphaA_hx_s > 0,
          "tms: conductances must be positive");
  require(p.c_p > 0 && p.mdot_p > 0 && p.mdot_s > 0,
          "tms: flow parameters must be positive");
  require(p.Q_cp_min <= p.Q_cp_max && p.T_tf_min <= p.T_tf_max,
          "tms: disturbance bounds must be ordered");

  // kappa <= 0: heat rejected to the secondary loop through the NTU model.
  const double kappa = ntu_coefficient(p.alphaA_hx_s, p.c_p, p.mdot_s);
  const double flow = p.c_p * p.mdot_p;

  ContinuousLti sys;
  sys.A = Mat::Zero(4, 4);
  sys.A(0, 0) = -p.alphaA_cp / p.C_cp_w;
  sys.A(0, 1) = p.alphaA_cp / p.C_cp_w;
  sys.A(1, 0) = p.alphaA_cp / p.C_cp_f;
  sys.A(1, 1) = (-p.alphaA_cp - flow) / p.C_cp_f;
  sys.A(2, 2) = (-p.alphaA_hx + kappa) / p.C_hx_w;
  sys.A(2, 3) = p.alphaA_hx / p.C_hx_w;
  sys.A(3, 1) = flow / p.C_hx_f;
  sys.A(3, 2) = p.alphaA_hx / p.C_hx_f;
  sys.A(3, 3) = (-p.alphaA_hx - flow) / p.C_hx_f;

  sys.B = Mat::Zero(4, 0);  // no actuated channel in this subsystem

  // Disturbance channels: heat load, tank outlet temperature, and the
  // constant secondary inlet temperature (singleton bounds).
  sys.E = Mat::Zero(4, 3);
  sys.E(0, 0) = 1.0 / p.C_cp_w;
  sys.E(1, 1) = flow / p.C_cp_f;
  sys.E(2, 2) = -kappa / p.C_hx_w;
  return sys;
}

CoDesignProblem build_tms_problem(const TmsParams& params,
                                  const TmsProblemConfig& config) {
  require(config.design_bounds.dim() == 2,
          "tms: design vector is (alphaA_hx, mdot_p)");
  require(config.operating_region.dim() == 4,
          "tms: operating region must be 4-dimensional");
  require(config.dt > 0 && config.N >= 1, "tms: invalid horizon");

  Box v((Vec(3) << params.Q_cp_min, params.T_tf_min, params.T_s).finished(),
        (Vec(3) << params.Q_cp_max, params.T_tf_max, params.T_s).finished());
  HPolytope u_adm(1, Mat(0, 1), Vec(0));  // no actuated channel

  SystemFamily family;
  family.bounds = config.design_bounds;
  family.labels = {"alphaA_hx [W/K]", "mdot_p [kg/s]"};
  const TmsParams base = params;
  const double dt = config.dt;
  family.build = [base, dt](const Vec& p) {
    require(p.size() == 2, "tms: design vector must have 2 components");
    TmsParams candidate = base;
    candidate.alphaA_hx = p(0);
    candidate.mdot_p = p(1);
    const ContinuousLti sys = build_tms_subsystem(candidate);
    return zoh_discretize(sys, Mat::Zero(0, 4), dt);
  };

  CostSpec cost;
  cost.x_ref = config.operating_region.center();
  cost.u_ref = Vec(0);
  cost.gamma1 = 1.0;
  cost.gamma2 = 1.0;
  cost.gamma3 = 0.0;
  cost.mp_weights = (Vec(2) << config.mass_weight, 0.0).finished();

  return CoDesignProblem{
      std::move(family),
      ReachSpec(config.operating_region, std::move(v), config.N,
                config.safe_set, std::move(u_adm)),
      std::move(cost)};
}

CoDesignProblem build_toy_frozen(const ToyFrozenConfig& config) {
  const Eigen::Index n = config.state_dim;
  require(n >= 1, "toy_frozen: state dimension must be positive");

  Box r0(Vec::Constant(n, -1.0), Vec::Constant(n, 1.0));
  Box v((Vec(1) << 0.0).finished(), (Vec(1) << 0.0).finished());
  HPolytope x_safe(Box(Vec::Constant(n, -10.0), Vec::Constant(n, 10.0))
                       .to_hpolytope());
  Mat hu(2, 1);
  hu << 1, -1;
  HPolytope u_adm(hu, Vec::Ones(2));

  SystemFamily family;
  family.bounds = config.design_bounds;
  for (Eigen::Index i = 0; i < config.design_bounds.dim(); ++i) {
    family.labels.push_back("p" + std::to_string(i + 1));
  }
  family.build = [n](const Vec&) {
    DiscreteClosedLoop model;
    model.Ad = Mat::Identity(n, n);
    model.Ed = Mat::Zero(n, 1);
    model.K = Mat::Zero(1, n);
    model.dt = 1.0;
    return model;
  };

  CostSpec cost;
  cost.x_ref = Vec::Zero(n);
  cost.u_ref = Vec::Zero(1);
  cost.gamma1 = 1.0;
  cost.gamma2 = 1.0;
  cost.gamma3 = 0.0;
  cost.mp_weights = config.mp_weights;

  return CoDesignProblem{std::move(family),
                         ReachSpec(std::move(r0), std::move(v), config.N,
                                   std::move(x_safe), std::move(u_adm)),
                         std::move(cost)};
}

CoDesignProblem build_toy_contraction(const ToyContractionConfig& config) {
  require(config.p_min <= config.p_max, "toy_contraction: bad bounds");
  Box r0((Vec(1) << -1.0).finished(), (Vec(1) << 1.0).finished());
  Box v((Vec(1) << 0.0).finished(), (Vec(1) << 0.0).finished());
  Mat hx(2, 1);
  hx << 1, -1;
  HPolytope x_safe(hx, Vec::Ones(2));
  Mat hu(2, 1);
  hu << 1, -1;
  HPolytope u_adm(hu, Vec::Ones(2));

  SystemFamily family;
  family.bounds = Box((Vec(1) << config.p_min).finished(),
                      (Vec(1) << config.p_max).finished());
  family.labels = {"a"};
  family.build = [](const Vec& p) {
    DiscreteClosedLoop model;
    model.Ad = Mat::Constant(1, 1, p(0));
    model.Ed = Mat::Zero(1, 1);
    model.K = Mat::Zero(1, 1);
    model.dt = 1.0;
    return model;
  };

  CostSpec cost;
  cost.x_ref = Vec::Zero(1);
  cost.u_ref = Vec::Zero(1);
  cost.gamma1 = 1.0;
  cost.gamma2 = 1.0;
  cost.gamma3 = 0.0;

  return CoDesignProblem{std::move(family),
                         ReachSpec(std::move(r0), std::move(v), config.N,
                                   std::move(x_safe), std::move(u_adm)),
                         std::move(cost)};
}

}  // namespace reachdesign
