"""Axisymmetric conformal metrics on the 2-sphere.

A profile stores the conformal exponent ``u`` on a uniform polar-angle grid,
so that the metric is ``g = exp(2u) * (dtheta^2 + sin(theta)^2 dphi^2)``.

The discretization is finite-volume: node ``i`` owns the dual cell
``[theta_{i-1/2}, theta_{i+1/2}]`` (half cells at the poles), areas are sums of
``exp(2u)`` against the exact round-sphere cell measure, and the Laplacian is
the flux difference across cell faces.  With this pairing the discrete
Gauss-Bonnet sum is exactly ``4 pi`` for every profile.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable

import numpy as np

TWO_PI = 2.0 * np.pi
MIN_INTERVALS = 16
# one-sided slope of u allowed at a pole (radian^-1)
POLE_SLOPE_TOL = 1e-3


class InvalidProfileError(ValueError):
    """Raised when an operation receives a profile that fails validation."""

    def __init__(self, violations: list[Violation]):
        self.violations = violations
        super().__init__("; ".join(str(v) for v in violations))


@dataclass(frozen=True)
class Violation:
    invariant: str
    node: int | None
    detail: str

    def __str__(self) -> str:
        where = "" if self.node is None else f" at node {self.node}"
        return f"{self.invariant}{where}: {self.detail}"


@dataclass(frozen=True)
class GridSpec:
    """Uniform grid ``theta_i = i*pi/n_intervals`` on ``[0, pi]``."""

    n_intervals: int

    def __post_init__(self):
        if isinstance(self.n_intervals, bool) or not isinstance(self.n_intervals, (int, np.integer)):
            raise TypeError("n_intervals must be an integer")
        if self.n_intervals < MIN_INTERVALS:
            raise ValueError(
                f"n_intervals={self.n_intervals} is too coarse; need >= {MIN_INTERVALS}"
            )

    @property
    def n_nodes(self) -> int:
        return self.n_intervals + 1

    @property
    def dtheta(self) -> float:
        return np.pi / self.n_intervals

    @cached_property
    def theta(self) -> np.ndarray:
        return np.linspace(0.0, np.pi, self.n_nodes)

    @cached_property
    def sin_theta(self) -> np.ndarray:
        s = np.sin(self.theta)
        s[0] = s[-1] = 0.0
        return s

    @cached_property
    def cos_theta(self) -> np.ndarray:
        c = np.cos(self.theta)
        c[0], c[-1] = 1.0, -1.0
        return c

    @cached_property
    def sin_half(self) -> np.ndarray:
        """``sin`` at the cell faces ``theta_{i+1/2}``, length n_intervals."""
        return np.sin(self.theta[:-1] + 0.5 * self.dtheta)

    @cached_property
    def cell_measure(self) -> np.ndarray:
        """Round-sphere measure of each dual cell divided by ``2 pi``; sums to 2."""
        d = self.dtheta
        v = 2.0 * self.sin_theta * np.sin(0.5 * d)
        v[0] = v[-1] = 2.0 * np.sin(0.25 * d) ** 2
        return v

    @cached_property
    def lower_half_measure(self) -> np.ndarray:
        """Measure of ``[theta_{i-1/2}, theta_i]`` over ``2 pi`` (zero at node 0)."""
        d = self.dtheta
        m = 2.0 * np.sin(self.theta - 0.25 * d) * np.sin(0.25 * d)
        m[0] = 0.0
        m[-1] = 2.0 * np.sin(0.25 * d) ** 2
        return m

    def node_index(self, theta: float) -> int:
        """Index of the node at angle ``theta``; raises if it is not a node."""
        x = theta / self.dtheta
        i = int(round(x))
        if abs(x - i) > 1e-9 or not 0 <= i <= self.n_intervals:
            raise ValueError(f"theta={theta!r} is not a node of the n={self.n_intervals} grid")
        return i


@dataclass(frozen=True, eq=False)
class SurfaceProfile:
    grid: GridSpec
    u: np.ndarray = field(repr=False)
    time: float = 0.0

    def __post_init__(self):
        u = np.array(self.u, dtype=float)
        u.setflags(write=False)
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "time", float(self.time))

    @classmethod
    def from_function(
        cls, n_intervals: int, func: Callable[[np.ndarray], np.ndarray], time: float = 0.0
    ) -> SurfaceProfile:
        grid = GridSpec(n_intervals)
        u = np.broadcast_to(np.asarray(func(grid.theta), dtype=float), grid.theta.shape)
        return cls(grid, u, time)

    def with_u(self, u: np.ndarray, time: float | None = None) -> SurfaceProfile:
        return SurfaceProfile(self.grid, u, self.time if time is None else time)

    def mirrored(self) -> SurfaceProfile:
        return self.with_u(self.u[::-1])


def validate_profile(p: SurfaceProfile) -> list[Violation]:
    """Return every invariant violation of ``p``; an empty list means valid."""
    n = p.grid.n_intervals
    u = p.u
    if u.ndim != 1 or u.shape[0] != n + 1:
        return [Violation("length", None, f"u has shape {u.shape}, expected ({n + 1},)")]
    bad = np.flatnonzero(~np.isfinite(u))
    out = [Violation("finite", int(i), f"u={u[i]!r}") for i in bad]
    if not np.isfinite(p.time):
        out.append(Violation("finite", None, f"time={p.time!r}"))
    if out:
        return out
    d = p.grid.dtheta
    slopes = {
        0: (-3.0 * u[0] + 4.0 * u[1] - u[2]) / (2.0 * d),
        n: (3.0 * u[n] - 4.0 * u[n - 1] + u[n - 2]) / (2.0 * d),
    }
    for i, s in slopes.items():
        if abs(s) > POLE_SLOPE_TOL:
            out.append(
                Violation("pole regularity", i, f"one-sided du/dtheta={s:.3e} exceeds {POLE_SLOPE_TOL:g}")
            )
    return out


def require_valid(p: SurfaceProfile) -> None:
    violations = validate_profile(p)
    if violations:
        raise InvalidProfileError(violations)


def _check_node(p: SurfaceProfile, i: int, interior: bool) -> int:
    n = p.grid.n_intervals
    if not isinstance(i, (int, np.integer)) or isinstance(i, bool):
        raise TypeError("node index must be an integer")
    if not 0 <= i <= n:
        raise IndexError(f"node {i} out of range [0, {n}]")
    if interior and i in (0, n):
        raise ValueError(f"node {i} is a pole; an interior parallel is required")
    return int(i)


# -- unchecked kernels, shared with the flow integrator ---------------------


def laplacian(grid: GridSpec, u: np.ndarray) -> np.ndarray:
    """Round-sphere Laplacian of an axisymmetric function, flux form.

    At the poles this reduces to ``4 (u_1 - u_0) / dtheta^2``, the ghost-reflection
    value of ``2 u_thetatheta``.
    """
    d = grid.dtheta
    flux = grid.sin_half * np.diff(u) / d
    div = np.empty_like(u)
    div[0] = flux[0]
    div[1:-1] = flux[1:] - flux[:-1]
    div[-1] = -flux[-1]
    return div / grid.cell_measure


def curvature_of(grid: GridSpec, u: np.ndarray) -> np.ndarray:
    return np.exp(-2.0 * u) * (1.0 - laplacian(grid, u))


def area_integral(grid: GridSpec, density: np.ndarray) -> float:
    """``int density dA_round`` over the whole sphere."""
    return TWO_PI * float(np.dot(grid.cell_measure, density))


def cap_integral(grid: GridSpec, density: np.ndarray) -> np.ndarray:
    """``int density dA_round`` over the cap ``theta' < theta_i``, at every node."""
    whole = grid.cell_measure * density
    below = np.concatenate(([0.0], np.cumsum(whole[:-1])))
    out = TWO_PI * (below + grid.lower_half_measure * density)
    out[0] = 0.0
    out[-1] = TWO_PI * float(np.sum(whole))
    return out


def dtheta_centered(grid: GridSpec, f: np.ndarray) -> np.ndarray:
    """Centered first derivative; the pole values use the reflection ``f_theta = 0``."""
    d = np.zeros_like(f)
    d[1:-1] = (f[2:] - f[:-2]) / (2.0 * grid.dtheta)
    return d


# -- public operations -----------------------------------------------------


def gaussian_curvature(p: SurfaceProfile) -> np.ndarray:
    """Gaussian curvature ``K = exp(-2u) (1 - Lap u)`` at every node."""
    require_valid(p)
    return curvature_of(p.grid, p.u)


def circumferences(p: SurfaceProfile) -> np.ndarray:
    """Lengths ``2 pi exp(u) sin(theta)`` of all parallels (0 at the poles)."""
    require_valid(p)
    return TWO_PI * np.exp(p.u) * p.grid.sin_theta


def circumference(p: SurfaceProfile, i: int) -> float:
    require_valid(p)
    i = _check_node(p, i, interior=False)
    return float(TWO_PI * np.exp(p.u[i]) * p.grid.sin_theta[i])


def arclength(p: SurfaceProfile) -> np.ndarray:
    """Meridian distance ``rho`` from the north pole (cumulative trapezoid of ``e^u``)."""
    require_valid(p)
    e = np.exp(p.u)
    steps = 0.5 * (e[1:] + e[:-1]) * p.grid.dtheta
    return np.concatenate(([0.0], np.cumsum(steps)))


def total_area(p: SurfaceProfile) -> float:
    require_valid(p)
    return area_integral(p.grid, np.exp(2.0 * p.u))


def cap_area_arrays(p: SurfaceProfile) -> tuple[np.ndarray, np.ndarray, float]:
    """``(A_plus, A_minus, A)`` for every node; ``A_minus = A - A_plus`` exactly."""
    require_valid(p)
    e2u = np.exp(2.0 * p.u)
    a_plus = cap_integral(p.grid, e2u)
    total = float(a_plus[-1])
    return a_plus, total - a_plus, total


def cap_areas(p: SurfaceProfile, i: int) -> tuple[float, float]:
    """Areas of the caps north and south of parallel ``i``."""
    a_plus, a_minus, _ = cap_area_arrays(p)
    i = _check_node(p, i, interior=True)
    return float(a_plus[i]), float(a_minus[i])


def gauss_bonnet_integral(p: SurfaceProfile) -> float:
    """Discrete ``int K dA``; equals ``4 pi`` up to rounding."""
    require_valid(p)
    e2u = np.exp(2.0 * p.u)
    return area_integral(p.grid, curvature_of(p.grid, p.u) * e2u)
