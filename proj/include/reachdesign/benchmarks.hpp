// Model builders for the shipped benchmark systems and their co-design
// problem definitions. Builders are addressable by name from the CLI.
#pragma once

#include "reachdesign/solver.hpp"

namespace reachdesign {

// Quarter-car active suspension. States: (z_us - z_0, zdot_us, z_s - z_us,
// zdot_s); design vector p = (k_s, c_s, p_c1..p_c4) with u = p_c' x.
struct SuspensionParams {
  double k_t = 232.5e3;  // tire stiffness, N/m
  double m_s = 325.0;    // quarter sprung mass, kg
  double m_us = 65.0;    // quarter unsprung mass, kg
  double dt = 0.01;      // s
  int N = 20;
  DisturbanceDiscretization disturbance =
      DisturbanceDiscretization::kExact;
};

ContinuousLti suspension_continuous(const SuspensionParams& params, double k_s,
                                    double c_s);

// Output map weighting suspension travel and sprung-mass acceleration.
Mat suspension_cost_map(const SuspensionParams& params, double k_s,
                        double c_s);

CoDesignProblem build_active_suspension(const SuspensionParams& params = {});

// Cold-plate + heat-exchanger subsystem of a pumped thermal management loop.
// States: (T_cp_w, T_cp_f, T_hx_w, T_hx_f). Exogenous disturbances: cold
// plate heat load and tank outlet temperature; the secondary inlet
// temperature enters as a constant disturbance channel. No numeric defaults
// ship; every quantity must be supplied.
struct TmsParams {
  double C_cp_w = 0.0;       // J/K
  double C_cp_f = 0.0;       // J/K
  double C_hx_w = 0.0;       // J/K
  double C_hx_f = 0.0;       // J/K
  double alphaA_cp = 0.0;    // W/K
  double alphaA_hx = 0.0;    // W/K
  double alphaA_hx_s = 0.0;  // W/K, secondary side
  double c_p = 0.0;          // J/(kg K)
  double mdot_p = 0.0;       // kg/s, primary loop
  double mdot_s = 0.0;       // kg/s, secondary loop
  double T_s = 0.0;          // K, secondary inlet temperature
  double Q_cp_min = 0.0, Q_cp_max = 0.0;  // W, heat-load bounds
  double T_tf_min = 0.0, T_tf_max = 0.0;  // K, tank outlet bounds
};

// Effectiveness-NTU heat-rejection coefficient: Qdot_hx = -kappa (T_s -
// T_hx_w) with kappa = c_p mdot_s (exp(-alphaA_hx_s / (c_p mdot_s)) - 1).
double ntu_coefficient(double alphaA_hx_s, double c_p, double mdot_s);

ContinuousLti build_tms_subsystem(const TmsParams& params);

// Co-design template over (alphaA_hx, mdot_p). Constraint sets, bounds and
// the mass-proxy weight all come from the caller.
struct TmsProblemConfig {
  Box design_bounds;          // (alphaA_hx, mdot_p)
  Box operating_region;       // K, 4 states
  HPolytope safe_set;         // temperature limits
  double mass_weight = 0.0;   // m_p = mass_weight * alphaA_hx
  double dt = 1.0;
  int N = 10;
  TmsProblemConfig() : design_bounds(Vec::Ones(2), Vec::Ones(2)),
                       operating_region(Vec::Zero(4), Vec::Zero(4)),
                       safe_set(Mat::Identity(4, 4), Vec::Zero(4)) {}
};

CoDesignProblem build_tms_problem(const TmsParams& params,
                                  const TmsProblemConfig& config);

// Frozen-dynamics toy: Ad = I, no disturbance, zero gain; the design vector
// only enters through the linear parameter cost.
struct ToyFrozenConfig {
  int state_dim = 2;
  int N = 3;
  Box design_bounds = Box(Vec::Zero(2), Vec::Ones(2));
  Vec mp_weights = Vec::Ones(2);
};
CoDesignProblem build_toy_frozen(const ToyFrozenConfig& config = {});

// One-state contraction toy: Ad = [p], tube cost only; optimum at the lower
// bound of p.
struct ToyContractionConfig {
  int N = 2;
  double p_min = 0.0, p_max = 1.0;
};
CoDesignProblem build_toy_contraction(const ToyContractionConfig& config = {});

}  // namespace reachdesign
