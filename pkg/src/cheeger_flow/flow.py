"""Unnormalized Ricci flow ``du/dt = -K`` by method of lines with classical RK4."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .identities import FlowTrace, TraceRecord, make_record
from .loops import loop_arrays
from .surface import SurfaceProfile, curvature_of, require_valid

log = logging.getLogger(__name__)

DEFAULT_MIN_AREA_FRACTION = 0.05

STOP_T_END = "t_end"
STOP_AREA = "area floor"
STOP_CURVATURE = "curvature cap"


class FlowError(RuntimeError):
    """The integration produced a non-finite profile."""

    def __init__(self, message: str, last_state: FlowState, trace: FlowTrace | None = None):
        super().__init__(message)
        self.last_state = last_state
        self.trace = trace


@dataclass(frozen=True)
class StepControl:
    cfl_factor: float = 0.2
    dt_min: float = 1e-12
    dt_max: float = 1e-2
    t_end: float = 0.25
    min_area: float | None = None  # None: 5% of the initial area
    max_curvature: float = 1e4

    def __post_init__(self):
        if not 0.0 < self.cfl_factor <= 0.5:
            raise ValueError(f"cfl_factor={self.cfl_factor} outside (0, 0.5]")
        if not 0.0 < self.dt_min <= self.dt_max:
            raise ValueError("need 0 < dt_min <= dt_max")
        if self.min_area is not None and not self.min_area > 0.0:
            raise ValueError("min_area must be > 0")
        if not self.max_curvature > 0.0:
            raise ValueError("max_curvature must be > 0")
        if not np.isfinite(self.t_end):
            raise ValueError("t_end must be finite")


@dataclass(frozen=True)
class FlowState:
    profile: SurfaceProfile
    step_count: int = 0
    last_dt: float = 0.0

    @property
    def time(self) -> float:
        return self.profile.time


def flow_rhs(p: SurfaceProfile) -> np.ndarray:
    """Ricci flow velocity of the conformal exponent, ``-K``."""
    require_valid(p)
    return -curvature_of(p.grid, p.u)


def stable_dt(p: SurfaceProfile, c: StepControl) -> float:
    """Explicit diffusive limit ``cfl * dtheta^2 * min(exp(2u))``, clamped to ``[dt_min, dt_max]``."""
    dt = c.cfl_factor * p.grid.dtheta**2 * float(np.min(np.exp(2.0 * p.u)))
    if dt < c.dt_min:
        log.warning("stable step %.3e below dt_min=%.3e; using dt_min", dt, c.dt_min)
        return c.dt_min
    return min(dt, c.dt_max)


def step(s: FlowState, c: StepControl, dt: float | None = None) -> FlowState:
    """Advance one RK4 step (``dt`` defaults to :func:`stable_dt`)."""
    p = s.profile
    grid = p.grid
    if dt is None:
        dt = stable_dt(p, c)

    def rhs(u):
        return -curvature_of(grid, u)

    u = p.u
    k1 = rhs(u)
    k2 = rhs(u + 0.5 * dt * k1)
    k3 = rhs(u + 0.5 * dt * k2)
    k4 = rhs(u + dt * k3)
    u_new = u + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    if not np.all(np.isfinite(u_new)):
        raise FlowError(f"non-finite profile after step {s.step_count + 1} at t={p.time:.6g}", s)
    return FlowState(p.with_u(u_new, p.time + dt), s.step_count + 1, dt)


def _stop_reason(p: SurfaceProfile, c: StepControl, min_area: float, record: TraceRecord) -> str | None:
    if p.time >= c.t_end - 1e-14 * max(1.0, abs(c.t_end)):
        return STOP_T_END
    if record.area <= min_area:
        return STOP_AREA
    if float(np.max(np.abs(curvature_of(p.grid, p.u)))) >= c.max_curvature:
        return STOP_CURVATURE
    return None


def evolve(
    s0: FlowState,
    c: StepControl,
    observer: Callable[[FlowState, TraceRecord], None] | None = None,
) -> FlowTrace:
    """Integrate until ``t_end``, the area floor or the curvature cap.

    One trace record is kept for the initial state and for every accepted
    step; the final step is shortened to land on ``t_end`` exactly.
    """
    require_valid(s0.profile)
    state = s0
    record = make_record(state.profile, loop_arrays(state.profile, check=False))
    trace = FlowTrace([record])
    min_area = c.min_area if c.min_area is not None else DEFAULT_MIN_AREA_FRACTION * record.area
    if observer is not None:
        observer(state, record)

    while (reason := _stop_reason(state.profile, c, min_area, record)) is None:
        dt = min(stable_dt(state.profile, c), c.t_end - state.time)
        try:
            state = step(state, c, dt)
        except FlowError as err:
            err.trace = trace.finalize("failure")
            raise
        record = make_record(state.profile, loop_arrays(state.profile, check=False))
        trace.records.append(record)
        if observer is not None:
            observer(state, record)
    trace.final_state = state
    return trace.finalize(reason)


def area_law_check(trace: FlowTrace) -> float:
    """Largest relative deviation of the recorded area from ``A(0) - 8 pi t``."""
    if not trace.records:
        raise ValueError("empty trace")
    t = trace.column("t")
    a = trace.column("area")
    predicted = a[0] - 8.0 * np.pi * (t - t[0])
    return float(np.max(np.abs(a - predicted)) / a[0])


def exact_constant_u(u0: float, t: float) -> float:
    """Closed-form flow of a constant exponent: ``u0 + log(1 - 2 e^{-2 u0} t) / 2``."""
    return u0 + 0.5 * np.log1p(-2.0 * np.exp(-2.0 * u0) * t)
