"""Set-based robust control co-design: zonotope reachability, support-function
costs and constraints, and an SQP co-design solver over plant + controller
parameters."""

from reachdesign._core import (
    Box,
    CandidateEval,
    CoDesignProblem,
    ConfigError,
    ConstraintMargins,
    CostBreakdown,
    DiscreteClosedLoop,
    HPolytope,
    OptimizationReport,
    ReachResult,
    SolverOptions,
    SuspensionParams,
    UnstableCandidateError,
    Zonotope,
    build_active_suspension,
    build_toy_contraction,
    linear_map,
    minkowski_sum,
    run_from_config,
    solve,
    support,
)

__all__ = [
    "Box",
    "CandidateEval",
    "CoDesignProblem",
    "ConfigError",
    "ConstraintMargins",
    "CostBreakdown",
    "DiscreteClosedLoop",
    "HPolytope",
    "OptimizationReport",
    "ReachResult",
    "SolverOptions",
    "SuspensionParams",
    "UnstableCandidateError",
    "Zonotope",
    "build_active_suspension",
    "build_toy_contraction",
    "linear_map",
    "minkowski_sum",
    "run_from_config",
    "solve",
    "support",
]
