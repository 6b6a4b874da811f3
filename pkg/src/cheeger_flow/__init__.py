"""Ricci flow on rotationally symmetric spheres and the Cheeger isoperimetric constant."""

__version__ = "0.1.0"

from .flow import FlowError, FlowState, StepControl, area_law_check, evolve, flow_rhs, step
from .identities import (
    FlowTrace,
    ResidualReport,
    TraceRecord,
    convergence_order,
    identity_13a,
    identity_13b,
    monotonicity_check,
    residual_12a,
    residual_12b,
    residual_12b_report,
    residual_heat_9,
    supersolution_sign,
)
from .loops import ParallelLoopStats, gamma_geodesic, global_cheeger, loop_stats, papasoglu_bound
from .scenarios import (
    ScenarioSpec,
    bump_sphere,
    detect_stationarity,
    dumbbell,
    find_stationary_candidate,
    round_sphere,
)
from .surface import (
    GridSpec,
    InvalidProfileError,
    SurfaceProfile,
    arclength,
    cap_areas,
    circumference,
    gaussian_curvature,
    total_area,
    validate_profile,
)

__all__ = [
    "FlowError",
    "FlowState",
    "FlowTrace",
    "GridSpec",
    "InvalidProfileError",
    "ParallelLoopStats",
    "ResidualReport",
    "ScenarioSpec",
    "StepControl",
    "SurfaceProfile",
    "TraceRecord",
    "arclength",
    "area_law_check",
    "bump_sphere",
    "cap_areas",
    "circumference",
    "convergence_order",
    "detect_stationarity",
    "dumbbell",
    "evolve",
    "find_stationary_candidate",
    "flow_rhs",
    "gamma_geodesic",
    "gaussian_curvature",
    "global_cheeger",
    "identity_13a",
    "identity_13b",
    "loop_stats",
    "monotonicity_check",
    "papasoglu_bound",
    "residual_12a",
    "residual_12b",
    "residual_12b_report",
    "residual_heat_9",
    "round_sphere",
    "step",
    "supersolution_sign",
    "total_area",
    "validate_profile",
]
