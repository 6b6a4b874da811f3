"""Numerical checks of the evolution equations, algebraic identities and monotonicity.

Spatial derivatives along the meridian use fourth-order centred differences in
``theta`` mapped to arclength through ``d/drho = exp(-u) d/dtheta``.  The
geometric inputs (curvature, Gamma, cap areas) keep their second-order
discretization, so residuals of smooth profiles still decay at second order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .loops import PAPASOGLU_SLACK, LoopArrays, ParallelLoopStats, argmin_with_refinement, loop_arrays
from .surface import SurfaceProfile, _check_node, cap_integral, curvature_of, require_valid

FOUR_PI = 4.0 * np.pi
THRESHOLD_GUARD = 1e-9
DEFAULT_MARGIN = 0.2
_STENCIL_REACH = 3


@dataclass(frozen=True, eq=False)
class ResidualReport:
    name: str
    grid_n: int
    theta: np.ndarray
    per_node: np.ndarray
    lhs: np.ndarray | None = None
    rhs: np.ndarray | None = None
    sup_norm: float = field(init=False)
    l2_norm: float = field(init=False)

    def __post_init__(self):
        r = np.asarray(self.per_node, dtype=float)
        object.__setattr__(self, "per_node", r)
        sup = float(np.max(np.abs(r))) if r.size else 0.0
        # grid-weighted: sqrt(dtheta * sum r^2)
        l2 = math.sqrt(math.pi / self.grid_n * float(np.dot(r, r)))
        object.__setattr__(self, "sup_norm", sup)
        object.__setattr__(self, "l2_norm", l2)

    def to_dict(self) -> dict:
        out = {
            "name": self.name,
            "grid_n": self.grid_n,
            "sup_norm": self.sup_norm,
            "l2_norm": self.l2_norm,
            "theta": self.theta.tolist(),
            "per_node": self.per_node.tolist(),
        }
        return out


# -- meridian derivatives --------------------------------------------------


def _d1(f: np.ndarray, d: float) -> np.ndarray:
    out = np.full_like(f, np.nan)
    out[2:-2] = (f[:-4] - 8.0 * f[1:-3] + 8.0 * f[3:-1] - f[4:]) / (12.0 * d)
    return out


def _d2(f: np.ndarray, d: float) -> np.ndarray:
    out = np.full_like(f, np.nan)
    out[2:-2] = (-f[:-4] + 16.0 * f[1:-3] - 30.0 * f[2:-2] + 16.0 * f[3:-1] - f[4:]) / (12.0 * d * d)
    return out


class _Meridian:
    """First and second arclength derivatives of nodal fields on one profile."""

    def __init__(self, p: SurfaceProfile):
        self.d = p.grid.dtheta
        self.emu = np.exp(-p.u)
        self.u_theta = _d1(p.u, self.d)

    def d_rho(self, f: np.ndarray) -> np.ndarray:
        return self.emu * _d1(f, self.d)

    def d2_rho(self, f: np.ndarray) -> np.ndarray:
        return self.from_theta(_d1(f, self.d), _d2(f, self.d))[1]

    def from_theta(self, f_t: np.ndarray, f_tt: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Map known ``theta``-derivatives to ``(d_rho f, d_rho^2 f)``."""
        return self.emu * f_t, self.emu**2 * (f_tt - self.u_theta * f_t)


def _window(p: SurfaceProfile, margin: float) -> np.ndarray:
    th = p.grid.theta
    idx = np.arange(th.size)
    n = p.grid.n_intervals
    mask = (th >= margin - 1e-12) & (th <= np.pi - margin + 1e-12)
    mask &= (idx >= _STENCIL_REACH) & (idx <= n - _STENCIL_REACH)
    return np.flatnonzero(mask)


# -- evolution equations ---------------------------------------------------


def residual_12a(p: SurfaceProfile, margin: float = DEFAULT_MARGIN) -> ResidualReport:
    """Length equation: ``d_t log L - [d_rho^2 log L + (Gamma/L) d_rho log L]``.

    The time derivative at a fixed parallel is ``-K``; nodes within ``margin`` of a
    pole are excluded.  Since ``log L = log 2pi + u + log sin(theta)``, only ``u``
    goes through the difference stencil; the ``sin`` part is differentiated exactly.
    """
    require_valid(p)
    g = p.grid
    arrays = loop_arrays(p, check=False)
    m = _Meridian(p)
    with np.errstate(invalid="ignore", divide="ignore"):
        cot = g.cos_theta / g.sin_theta
        first, second = m.from_theta(m.u_theta + cot, _d2(p.u, g.dtheta) - 1.0 / g.sin_theta**2)
        lhs = -curvature_of(g, p.u)
        rhs = second + arrays.gamma / arrays.L * first
    idx = _window(p, margin)
    return ResidualReport(
        "residual_12a", p.grid.n_intervals, p.grid.theta[idx], (lhs - rhs)[idx], lhs[idx], rhs[idx]
    )


def _cap_equation(p: SurfaceProfile, arrays: LoopArrays, side: str) -> tuple[np.ndarray, np.ndarray]:
    m = _Meridian(p)
    L, gamma = arrays.L, arrays.gamma
    if side == "plus":
        a, rate = arrays.A_plus, 2.0 * gamma - FOUR_PI
    else:
        a, rate = arrays.A_minus, -2.0 * gamma - FOUR_PI
    with np.errstate(invalid="ignore", divide="ignore"):
        log_a = np.log(a)
        lhs = rate / a
        rhs = m.d2_rho(log_a) + L**2 / a**2 - FOUR_PI / a + gamma / L * m.d_rho(log_a)
    return lhs, rhs


def residual_12b(p: SurfaceProfile, i: int) -> tuple[float, float]:
    """Cap-area equations at parallel ``i``; returns the (plus, minus) residuals.

    The left side is the Gauss-Bonnet rate ``dA+/dt = 2 Gamma - 4 pi`` (and
    ``dA-/dt = -2 Gamma - 4 pi``) divided by the cap area.
    """
    require_valid(p)
    i = _check_node(p, i, interior=True)
    n = p.grid.n_intervals
    if not _STENCIL_REACH <= i <= n - _STENCIL_REACH:
        raise ValueError(f"node {i} is too close to a pole for the derivative stencil")
    arrays = loop_arrays(p, check=False)
    plus = _cap_equation(p, arrays, "plus")
    minus = _cap_equation(p, arrays, "minus")
    return float(plus[0][i] - plus[1][i]), float(minus[0][i] - minus[1][i])


def residual_12b_report(p: SurfaceProfile, side: str = "plus", margin: float = DEFAULT_MARGIN) -> ResidualReport:
    if side not in ("plus", "minus"):
        raise ValueError("side must be 'plus' or 'minus'")
    require_valid(p)
    arrays = loop_arrays(p, check=False)
    lhs, rhs = _cap_equation(p, arrays, side)
    idx = _window(p, margin)
    return ResidualReport(
        f"residual_12b_{side}", p.grid.n_intervals, p.grid.theta[idx], (lhs - rhs)[idx], lhs[idx], rhs[idx]
    )


def heat_equation_sides(p: SurfaceProfile) -> tuple[np.ndarray, np.ndarray]:
    """Both sides of the heat-type equation for ``log h_sum`` at every node.

    The left side is assembled from the rates the discrete flow actually
    produces at fixed parallels: ``d_t log L = -K``, ``d_t A+`` the cap integral
    of ``-2 K e^{2u}``, and ``d_t A`` its total.
    """
    require_valid(p)
    g = p.grid
    arrays = loop_arrays(p, check=False)
    K = curvature_of(g, p.u)
    rate_density = -2.0 * K * np.exp(2.0 * p.u)
    da_plus = cap_integral(g, rate_density)
    da = float(da_plus[-1])
    da_minus = da - da_plus
    m = _Meridian(p)
    with np.errstate(divide="ignore", invalid="ignore"):
        log_h = np.log(arrays.h_sum)
    ap, am, A = arrays.A_plus, arrays.A_minus, arrays.area
    with np.errstate(invalid="ignore", divide="ignore"):
        lhs = -K - da_plus / ap - da_minus / am + da / A
        bracket = ap / am + am / ap
        rhs = (
            m.d2_rho(log_h)
            + arrays.gamma / arrays.L * m.d_rho(log_h)
            + (FOUR_PI - arrays.hamilton) / A * bracket
        )
    return lhs, rhs


def residual_heat_9(p: SurfaceProfile, margin: float = DEFAULT_MARGIN) -> ResidualReport:
    lhs, rhs = heat_equation_sides(p)
    idx = _window(p, margin)
    return ResidualReport(
        "residual_heat_9", p.grid.n_intervals, p.grid.theta[idx], (lhs - rhs)[idx], lhs[idx], rhs[idx]
    )


# -- algebra ---------------------------------------------------------------


def _positive(**values: float) -> None:
    for name, v in values.items():
        if not (np.isfinite(v) and v > 0):
            raise ValueError(f"{name} must be positive and finite, got {v!r}")


def identity_13a(A_plus: float, A_minus: float) -> tuple[float, float]:
    """``4pi/A+ + 4pi/A- - 8pi/A`` and ``(4pi/A)(A+/A- + A-/A+)``."""
    _positive(A_plus=A_plus, A_minus=A_minus)
    A = A_plus + A_minus
    lhs = FOUR_PI / A_plus + FOUR_PI / A_minus - 2.0 * FOUR_PI / A
    rhs = FOUR_PI / A * (A_plus / A_minus + A_minus / A_plus)
    return lhs, rhs


def identity_13b(L: float, A_plus: float, A_minus: float) -> tuple[float, float, float]:
    _positive(L=L, A_plus=A_plus, A_minus=A_minus)
    A = A_plus + A_minus
    bracket = A_plus / A_minus + A_minus / A_plus
    h = L * A / (A_plus * A_minus)
    lhs = L**2 / A_plus**2 + L**2 / A_minus**2
    mid = L**2 / (A_plus * A_minus) * bracket
    rhs = h * L / A * bracket
    return lhs, mid, rhs


def random_identity_trials(seed: int, trials: int = 1000) -> dict:
    """Seeded stress test of both identities; returns worst relative gaps."""
    rng = np.random.default_rng(seed)
    # log-uniform over six decades
    samples = np.exp(rng.uniform(np.log(1e-3), np.log(1e3), size=(trials, 3)))
    worst_a = worst_b = 0.0
    for L, ap, am in samples:
        lhs, rhs = identity_13a(ap, am)
        worst_a = max(worst_a, abs(lhs - rhs) / abs(lhs))
        b = identity_13b(L, ap, am)
        worst_b = max(worst_b, (max(b) - min(b)) / abs(b[0]))
    return {"seed": seed, "trials": trials, "max_rel_13a": worst_a, "max_rel_13b": worst_b}


def supersolution_sign(stats: ParallelLoopStats, total_area: float) -> float:
    """Zeroth-order term ``((4pi - h L)/A)(A+/A- + A-/A+)`` of the heat-type equation."""
    bracket = stats.A_plus / stats.A_minus + stats.A_minus / stats.A_plus
    return (FOUR_PI - stats.hamilton_ratio) / total_area * bracket


# -- traces ----------------------------------------------------------------


@dataclass
class TraceRecord:
    t: float
    area: float
    h_sum_global: float
    h_min_global: float
    argmin_theta: float
    L_at_min: float
    gamma_at_min: float
    hamilton_at_min: float
    dh_dt: float = float("nan")
    threshold_ok: bool = False
    papasoglu_ok: bool = True
    stop_reason: str | None = None


CSV_COLUMNS = (
    "t",
    "area",
    "h_sum_global",
    "h_min_global",
    "argmin_theta",
    "L_at_min",
    "gamma_at_min",
    "hamilton_at_min",
    "dh_dt",
    "threshold_ok",
    "papasoglu_ok",
)


def make_record(p: SurfaceProfile, arrays: LoopArrays | None = None) -> TraceRecord:
    """Global isoperimetric observables of one profile."""
    if arrays is None:
        arrays = loop_arrays(p)
    i, refined = argmin_with_refinement(arrays.h_sum, arrays.theta, p.grid.dtheta)
    h_min_global = float(np.min(arrays.h_min[1:-1]))
    bound = 16.0 / math.sqrt(arrays.area)
    hamilton = float(arrays.hamilton[i])
    return TraceRecord(
        t=p.time,
        area=arrays.area,
        h_sum_global=float(arrays.h_sum[i]),
        h_min_global=h_min_global,
        argmin_theta=refined,
        L_at_min=float(arrays.L[i]),
        gamma_at_min=float(arrays.gamma[i]),
        hamilton_at_min=hamilton,
        threshold_ok=bool(hamilton < FOUR_PI * (1.0 - THRESHOLD_GUARD)),
        papasoglu_ok=bool(h_min_global <= bound * (1.0 + PAPASOGLU_SLACK)),
    )


@dataclass
class FlowTrace:
    records: list[TraceRecord] = field(default_factory=list)
    stop_reason: str | None = None
    final_state: object | None = field(default=None, repr=False, compare=False)

    def __len__(self) -> int:
        return len(self.records)

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.records])

    def finalize(self, stop_reason: str | None = None) -> FlowTrace:
        """Fill ``dh_dt`` (second-order differences in time) and tag the last record."""
        if stop_reason is not None:
            self.stop_reason = stop_reason
        if not self.records:
            return self
        t = self.column("t")
        h = self.column("h_sum_global")
        if len(t) >= 3:
            dh = np.gradient(h, t, edge_order=2)
        elif len(t) == 2:
            dh = np.full(2, (h[1] - h[0]) / (t[1] - t[0]))
        else:
            dh = np.zeros(1)
        for r, v in zip(self.records, dh):
            r.dh_dt = float(v)
            r.stop_reason = None
        self.records[-1].stop_reason = self.stop_reason
        return self


@dataclass(frozen=True)
class MonotonicityViolation:
    index: int
    t_start: float
    t_end: float
    h_start: float
    h_end: float


def monotonicity_check(trace: FlowTrace, tol: float) -> list[MonotonicityViolation]:
    """Consecutive pairs where ``h_sum_global`` fell by more than ``tol * h`` below the threshold."""
    if tol < 0:
        raise ValueError("tol must be non-negative")
    out = []
    recs = trace.records
    for k in range(len(recs) - 1):
        a, b = recs[k], recs[k + 1]
        if a.threshold_ok and a.h_sum_global - b.h_sum_global > tol * a.h_sum_global:
            out.append(MonotonicityViolation(k, a.t, b.t, a.h_sum_global, b.h_sum_global))
    return out


def strictly_increasing(trace: FlowTrace) -> bool:
    h = trace.column("h_sum_global")
    return bool(np.all(np.diff(h) > 0))


# -- convergence -----------------------------------------------------------

EXACT_FLOOR = 1e-10  # second differences amplify rounding by 1/dtheta^2


def convergence_order(
    residual_fn: Callable[[SurfaceProfile], ResidualReport],
    family: Callable[[int], SurfaceProfile],
    grids: Sequence[int],
) -> float | str:
    """Least-squares slope of ``log(sup_norm)`` against ``log(dtheta)``.

    Returns ``"exact"`` when some residual vanishes to rounding.
    """
    grids = list(grids)
    if len(grids) < 2:
        raise ValueError("need at least two grids")
    for a, b in zip(grids, grids[1:]):
        if b != 2 * a:
            raise ValueError("each grid must double the previous one")
    sups = [residual_fn(family(n)).sup_norm for n in grids]
    if min(sups) <= EXACT_FLOOR:
        return "exact"
    x = np.log(np.pi / np.asarray(grids, dtype=float))
    y = np.log(sups)
    slope = np.polyfit(x, y, 1)[0]
    return float(slope)


def sup_norms(reports: Iterable[ResidualReport]) -> dict[str, float]:
    return {r.name: r.sup_norm for r in reports}
