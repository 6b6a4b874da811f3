"""Isoperimetric quantities of the parallel loops of an axisymmetric sphere."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .surface import (
    TWO_PI,
    SurfaceProfile,
    _check_node,
    cap_integral,
    dtheta_centered,
    require_valid,
)

PAPASOGLU_SLACK = 1e-3


@dataclass(frozen=True)
class ParallelLoopStats:
    node_index: int
    theta: float
    rho: float
    L: float
    A_plus: float
    A_minus: float
    gamma_total: float
    h_sum: float
    h_min: float
    hamilton_ratio: float


@dataclass(frozen=True, eq=False)
class LoopArrays:
    """Per-node loop quantities; entries at the two poles are NaN except ``L``, ``rho``, areas."""

    theta: np.ndarray
    rho: np.ndarray
    L: np.ndarray
    A_plus: np.ndarray
    A_minus: np.ndarray
    area: float
    gamma: np.ndarray
    h_sum: np.ndarray
    h_min: np.ndarray
    hamilton: np.ndarray

    def stats(self, i: int) -> ParallelLoopStats:
        return ParallelLoopStats(
            node_index=int(i),
            theta=float(self.theta[i]),
            rho=float(self.rho[i]),
            L=float(self.L[i]),
            A_plus=float(self.A_plus[i]),
            A_minus=float(self.A_minus[i]),
            gamma_total=float(self.gamma[i]),
            h_sum=float(self.h_sum[i]),
            h_min=float(self.h_min[i]),
            hamilton_ratio=float(self.hamilton[i]),
        )


def loop_arrays(p: SurfaceProfile, check: bool = True) -> LoopArrays:
    if check:
        require_valid(p)
    g = p.grid
    eu = np.exp(p.u)
    L = TWO_PI * eu * g.sin_theta
    a_plus = cap_integral(g, eu * eu)
    area = float(a_plus[-1])
    a_minus = area - a_plus
    rho = np.concatenate(([0.0], np.cumsum(0.5 * (eu[1:] + eu[:-1]) * g.dtheta)))
    gamma = TWO_PI * (g.cos_theta + dtheta_centered(g, p.u) * g.sin_theta)

    h_sum = np.full_like(L, np.nan)
    h_min = np.full_like(L, np.nan)
    inner = slice(1, -1)
    h_sum[inner] = L[inner] * (1.0 / a_plus[inner] + 1.0 / a_minus[inner])
    h_min[inner] = L[inner] / np.minimum(a_plus[inner], a_minus[inner])
    gamma[0] = gamma[-1] = np.nan
    return LoopArrays(
        theta=g.theta,
        rho=rho,
        L=L,
        A_plus=a_plus,
        A_minus=a_minus,
        area=area,
        gamma=gamma,
        h_sum=h_sum,
        h_min=h_min,
        hamilton=h_sum * L,
    )


def loop_stats(p: SurfaceProfile, i: int) -> ParallelLoopStats:
    """Length, cap areas, total geodesic curvature and both Cheeger ratios of parallel ``i``.

    ``h_sum = L (1/A+ + 1/A-)`` and ``h_min = L / min(A+, A-)``; they differ by a
    factor in ``[1, 2]``.
    """
    arrays = loop_arrays(p)
    i = _check_node(p, i, interior=True)
    return arrays.stats(i)


def gamma_geodesic(p: SurfaceProfile, i: int) -> float:
    """Total geodesic curvature ``2 pi (cos theta + u_theta sin theta)`` of parallel ``i``."""
    require_valid(p)
    i = _check_node(p, i, interior=True)
    g = p.grid
    u_theta = (p.u[i + 1] - p.u[i - 1]) / (2.0 * g.dtheta)
    return float(TWO_PI * (g.cos_theta[i] + u_theta * g.sin_theta[i]))


def argmin_with_refinement(values: np.ndarray, theta: np.ndarray, dtheta: float) -> tuple[int, float]:
    """Grid argmin over interior nodes (first on ties) and the parabolic vertex through its neighbours."""
    inner = values[1:-1]
    i = int(np.argmin(inner)) + 1
    if i - 1 < 1 or i + 1 > len(values) - 2:
        return i, float(theta[i])
    fm, f0, fp = values[i - 1], values[i], values[i + 1]
    curv = fm - 2.0 * f0 + fp
    if not curv > 0.0:
        return i, float(theta[i])
    offset = 0.5 * (fm - fp) / curv
    return i, float(theta[i] + np.clip(offset, -0.5, 0.5) * dtheta)


def global_cheeger(p: SurfaceProfile) -> tuple[ParallelLoopStats, float]:
    """Parallel minimizing ``h_sum`` and a sub-grid estimate of the minimizing angle."""
    arrays = loop_arrays(p)
    i, refined = argmin_with_refinement(arrays.h_sum, arrays.theta, p.grid.dtheta)
    return arrays.stats(i), refined


def papasoglu_bound(p: SurfaceProfile, tol: float = PAPASOGLU_SLACK) -> tuple[float, float, bool]:
    """Compare the min-form Cheeger constant with ``16 / sqrt(A)``.

    Returns ``(bound, h_min_global, satisfied)``.
    """
    arrays = loop_arrays(p)
    bound = 16.0 / np.sqrt(arrays.area)
    h_min_global = float(np.min(arrays.h_min[1:-1]))
    return float(bound), h_min_global, bool(h_min_global <= bound * (1.0 + tol))
