"""Named initial profiles and the stationary-Cheeger candidate search."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .flow import StepControl
from .identities import FlowTrace, supersolution_sign
from .loops import loop_arrays
from .surface import SurfaceProfile

FOUR_PI = 4.0 * np.pi


def round_sphere(r: float, n: int) -> SurfaceProfile:
    if not r > 0:
        raise ValueError(f"r={r!r} outside accepted range (0, inf)")
    return SurfaceProfile.from_function(n, lambda th: np.full_like(th, math.log(r)))


def _gaussian(x, center, w):
    return np.exp(-((x - center) ** 2) / w**2)


def bump_sphere(a: float, w: float, n: int) -> SurfaceProfile:
    """Equatorial Gaussian band ``u = a exp(-(theta - pi/2)^2 / w^2)``.

    The Gaussian tail has slope ``a g'(0)`` at the poles; it is cancelled by
    subtracting ``a g'(0) sin(theta) cos(theta)^2``, which is mirror symmetric,
    vanishes at the equator and is below ``4e-4 |a|`` for ``w <= 0.5``.
    Ranges: ``|a| <= 1``, ``0.1 <= w <= 1``.
    """
    if not abs(a) <= 1.0:
        raise ValueError(f"a={a!r} outside accepted range [-1, 1]")
    if not 0.1 <= w <= 1.0:
        raise ValueError(f"w={w!r} outside accepted range [0.1, 1]")
    slope0 = math.pi / w**2 * math.exp(-(math.pi**2) / (4.0 * w**2))

    def u(th):
        return a * (_gaussian(th, math.pi / 2, w) - slope0 * np.sin(th) * np.cos(th) ** 2)

    return SurfaceProfile.from_function(n, u)


def dumbbell(neck: float, w: float, n: int, lobe: float = 0.2, offset: float = math.pi / 6) -> SurfaceProfile:
    """Two lobes at ``theta = pi/2 -+ offset`` joined by a depressed equator.

    Written in ``z = cos(theta)`` so the profile is smooth at both poles:
    ``u = -neck G(z; 0, w) + lobe [G(z; z0, w) + G(z; -z0, w)]`` with
    ``z0 = sin(offset)``.  Ranges: ``0 < neck < 1``, ``0.2 <= w <= 0.8``,
    ``0 <= lobe <= 0.5``, ``0 < offset < pi/2``.
    """
    if not 0.0 < neck < 1.0:
        raise ValueError(f"neck={neck!r} outside accepted range (0, 1)")
    if not 0.2 <= w <= 0.8:
        raise ValueError(f"w={w!r} outside accepted range [0.2, 0.8]")
    if not 0.0 <= lobe <= 0.5:
        raise ValueError(f"lobe={lobe!r} outside accepted range [0, 0.5]")
    if not 0.0 < offset < math.pi / 2:
        raise ValueError(f"offset={offset!r} outside accepted range (0, pi/2)")
    z0 = math.sin(offset)

    def u(th):
        z = np.cos(th)
        return -neck * _gaussian(z, 0.0, w) + lobe * (_gaussian(z, z0, w) + _gaussian(z, -z0, w))

    return SurfaceProfile.from_function(n, u)


@dataclass(frozen=True)
class Family:
    build: Callable[..., SurfaceProfile]
    param: str
    ranges: dict[str, tuple[float, float]]
    defaults: dict[str, float] = field(default_factory=dict)


FAMILIES: dict[str, Family] = {
    "round_sphere": Family(round_sphere, "r", {"r": (0.0, math.inf)}, {"r": 1.0}),
    "bump_sphere": Family(bump_sphere, "a", {"a": (-1.0, 1.0), "w": (0.1, 1.0)}, {"a": 0.3, "w": 0.5}),
    "dumbbell": Family(
        dumbbell,
        "neck",
        {"neck": (0.0, 1.0), "w": (0.2, 0.8), "lobe": (0.0, 0.5), "offset": (0.0, math.pi / 2)},
        {"neck": 0.5, "w": 0.4},
    ),
}


def build_profile(name: str, params: dict[str, float], n: int) -> SurfaceProfile:
    try:
        fam = FAMILIES[name]
    except KeyError:
        raise ValueError(f"unknown scenario {name!r}; known: {sorted(FAMILIES)}") from None
    unknown = set(params) - set(fam.ranges)
    if unknown:
        raise ValueError(f"scenario {name!r} does not accept {sorted(unknown)}")
    kwargs = {**fam.defaults, **params}
    return fam.build(n=n, **kwargs)


@dataclass(frozen=True)
class ScenarioSpec:
    name: str
    parameters: dict[str, float] = field(default_factory=dict)
    grid_n: int = 256
    step_control: StepControl = field(default_factory=StepControl)

    def __post_init__(self):
        if self.name not in FAMILIES:
            raise ValueError(f"unknown scenario {self.name!r}; known: {sorted(FAMILIES)}")

    def build(self, grid_n: int | None = None) -> SurfaceProfile:
        return build_profile(self.name, dict(self.parameters), grid_n or self.grid_n)


# -- stationarity ----------------------------------------------------------


@dataclass(frozen=True)
class StationaryCandidate:
    found: bool
    message: str
    param: float | None = None
    profile: SurfaceProfile | None = None
    diagnostics: dict[str, float] = field(default_factory=dict)


def equator_balance(p: SurfaceProfile) -> float:
    """``L^2 - 4 pi A+`` at the equator; zero where the loop length is ``2 sqrt(pi A+)``."""
    n = p.grid.n_intervals
    if n % 2:
        raise ValueError("the equator is a node only for even n_intervals")
    arrays = loop_arrays(p)
    i = n // 2
    return float(arrays.L[i] ** 2 - FOUR_PI * arrays.A_plus[i])


def equator_diagnostics(p: SurfaceProfile) -> dict[str, float]:
    arrays = loop_arrays(p)
    i = p.grid.n_intervals // 2
    stats = arrays.stats(i)
    return {
        "balance": stats.L**2 - FOUR_PI * stats.A_plus,
        "area_gap": stats.A_plus - stats.A_minus,
        "gamma_equator": stats.gamma_total,
        "hamilton_ratio": stats.hamilton_ratio,
        "hamilton_over_4pi": stats.hamilton_ratio / FOUR_PI,
        "h_min_times_L": stats.h_min * stats.L,
        "supersolution_sign": supersolution_sign(stats, arrays.area),
    }


def find_stationary_candidate(
    family: str,
    param_range: tuple[float, float],
    n: int,
    tol: float = 1e-10,
    max_iter: int = 200,
    **fixed: float,
) -> StationaryCandidate:
    """Bisect the family parameter for ``L^2 = 4 pi A+`` at the equator.

    Mirror-symmetric families have ``A+ = A-`` at the equator, so the root is
    the configuration where both caps satisfy the loop-length condition at
    once.  Convergence is declared when ``|L^2 - 4 pi A+| <= tol * L^2``.
    """
    if family not in FAMILIES:
        raise ValueError(f"unregistered family {family!r}; known: {sorted(FAMILIES)}")
    fam = FAMILIES[family]
    lo, hi = map(float, param_range)
    if not lo < hi:
        raise ValueError("param_range must be increasing")
    if n % 2:
        raise ValueError("the equator is a node only for even n")

    def member(x: float) -> SurfaceProfile:
        return build_profile(family, {**fixed, fam.param: x}, n)

    def s(x: float) -> tuple[float, float]:
        p = member(x)
        return equator_balance(p), float(loop_arrays(p).L[n // 2] ** 2)

    s_lo, _ = s(lo)
    s_hi, _ = s(hi)
    if s_lo == 0.0:
        hi = lo
    elif s_hi == 0.0:
        lo = hi
    elif np.sign(s_lo) == np.sign(s_hi):
        return StationaryCandidate(False, "no sign change in range", diagnostics={"s_lo": s_lo, "s_hi": s_hi})

    mid = 0.5 * (lo + hi)
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        s_mid, scale = s(mid)
        if abs(s_mid) <= tol * scale or hi - lo <= 4 * np.finfo(float).eps * max(1.0, abs(mid)):
            break
        if np.sign(s_mid) == np.sign(s_lo):
            lo, s_lo = mid, s_mid
        else:
            hi = mid
    p = member(mid)
    return StationaryCandidate(True, "root found", mid, p, equator_diagnostics(p))


def detect_stationarity(trace: FlowTrace, tol: float) -> list[float]:
    """Times where ``|dh/dt| <= tol * h_sum_global``."""
    if len(trace) < 3:
        raise ValueError("need at least three records")
    return [r.t for r in trace.records if abs(r.dh_dt) <= tol * r.h_sum_global]
