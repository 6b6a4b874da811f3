"""Scenario constructors, the equator root search and the stationarity detector."""

import math

import numpy as np
import pytest

from cheeger_flow import (
    FlowState,
    FlowTrace,
    ScenarioSpec,
    StepControl,
    bump_sphere,
    cap_areas,
    detect_stationarity,
    dumbbell,
    evolve,
    find_stationary_candidate,
    gamma_geodesic,
    gaussian_curvature,
    global_cheeger,
    round_sphere,
    total_area,
    validate_profile,
)
from cheeger_flow.scenarios import FAMILIES, build_profile, equator_balance

from conftest import FOUR_PI, N, equator, run_flow
from test_identities import synthetic_trace

# tests/oracles.py: brentq on the adaptive-quadrature balance, and a Richardson curvature
ROOT_ORACLE = 0.7081093953447014
PINCHED_K_EQUATOR = -2.551676929531108
DUMBBELL_K_EQUATOR = -17.187093453089137
DUMBBELL_K_AT_03 = 0.3296650614806451
# regression values of this implementation at n = 256
ROOT_N256 = 0.7081053196452558
ROOT_DH_DT = -1.2735419193159032


class TestConstructors:
    @pytest.mark.parametrize(
        "name, params",
        [
            ("round_sphere", {"r": 1e-3}),
            ("round_sphere", {"r": 1e3}),
            ("bump_sphere", {"a": 1.0, "w": 0.1}),
            ("bump_sphere", {"a": -1.0, "w": 1.0}),
            ("dumbbell", {"neck": 0.99, "w": 0.2, "lobe": 0.5}),
            ("dumbbell", {"neck": 1e-3, "w": 0.8, "lobe": 0.0}),
        ],
    )
    def test_valid_at_range_extremes(self, name, params):
        assert validate_profile(build_profile(name, params, N)) == []

    @pytest.mark.parametrize(
        "call",
        [
            lambda: round_sphere(0.0, N),
            lambda: bump_sphere(1.5, 0.5, N),
            lambda: bump_sphere(0.3, 0.05, N),
            lambda: dumbbell(1.0, 0.4, N),
            lambda: dumbbell(0.5, 0.9, N),
        ],
    )
    def test_out_of_range(self, call):
        with pytest.raises(ValueError, match="outside accepted range"):
            call()

    def test_round_sphere(self):
        p = round_sphere(2.0, N)
        assert total_area(p) == pytest.approx(16 * math.pi, rel=1e-14)
        assert global_cheeger(p)[0].h_sum == pytest.approx(1.0, rel=1e-14)

    def test_flat_bump_is_unit_sphere(self):
        np.testing.assert_array_equal(bump_sphere(0.0, 0.5, N).u, 0.0)

    def test_pinched_bump_curvature(self):
        K = gaussian_curvature(bump_sphere(-0.3, 0.5, N))
        assert K[N // 2] == pytest.approx(PINCHED_K_EQUATOR, rel=2e-3)

    def test_dumbbell_curvature(self):
        p = dumbbell(0.5, 0.4, N)
        K = gaussian_curvature(p)
        assert K[N // 2] == pytest.approx(DUMBBELL_K_EQUATOR, rel=2e-3)
        assert K[0] > 0
        k03 = np.interp(0.3, p.grid.theta, K)
        assert k03 == pytest.approx(DUMBBELL_K_AT_03, abs=2e-3)
        assert K.min() < 0 < K.max()

    def test_dumbbell_small_neck_approaches_lobes_only(self):
        a = dumbbell(1e-4, 0.4, N)
        b = dumbbell(0.5, 0.4, N, lobe=0.2)
        c = build_profile("dumbbell", {"neck": 1e-4, "w": 0.4}, N)
        np.testing.assert_array_equal(a.u, c.u)
        assert np.abs(a.u - b.u).max() > 0.4
        assert abs(a.u[N // 2] - b.u[N // 2] - 0.5) < 1e-3

    @pytest.mark.parametrize("p", [bump_sphere(0.3, 0.5, N), dumbbell(0.5, 0.4, N), bump_sphere(-0.7, 0.2, N)])
    def test_mirror_symmetric(self, p):
        np.testing.assert_allclose(p.u, p.u[::-1], atol=1e-14)
        ap, am = cap_areas(p, equator(p))
        assert ap == pytest.approx(am, rel=1e-13)
        assert abs(gamma_geodesic(p, equator(p))) < 1e-12


class TestScenarioSpec:
    def test_unknown_name(self):
        with pytest.raises(ValueError, match="unknown scenario"):
            ScenarioSpec("torus")

    def test_unknown_parameter(self):
        with pytest.raises(ValueError, match="does not accept"):
            ScenarioSpec("round_sphere", {"a": 1.0}).build()

    def test_build_uses_defaults(self):
        p = ScenarioSpec("bump_sphere", grid_n=64).build()
        np.testing.assert_array_equal(p.u, bump_sphere(0.3, 0.5, 64).u)

    def test_registry(self):
        assert set(FAMILIES) == {"round_sphere", "bump_sphere", "dumbbell"}


class TestStationaryCandidate:
    def test_round_sphere_no_sign_change(self):
        c = find_stationary_candidate("round_sphere", (0.1, 10.0), N)
        assert not c.found
        assert c.message == "no sign change in range"
        r = 0.1
        assert c.diagnostics["s_lo"] == pytest.approx(-4 * math.pi**2 * r**2, rel=1e-12)

    def test_round_sphere_balance_closed_form(self):
        for r in (0.3, 1.0, 4.0):
            assert equator_balance(round_sphere(r, N)) == pytest.approx(-4 * math.pi**2 * r**2, rel=1e-12)

    def test_bump_root(self):
        c = find_stationary_candidate("bump_sphere", (0.0, 1.0), N, w=0.5)
        assert c.found
        assert c.param == pytest.approx(ROOT_N256, rel=1e-9)
        assert c.param == pytest.approx(ROOT_ORACLE, abs=1e-5)
        d = c.diagnostics
        assert abs(d["balance"]) <= 1e-9 * FOUR_PI
        assert abs(d["area_gap"]) < 1e-12
        assert abs(d["gamma_equator"]) < 1e-12
        # the min-form product sits at the loop-length condition
        assert d["h_min_times_L"] == pytest.approx(FOUR_PI, rel=1e-9)
        assert d["hamilton_over_4pi"] == pytest.approx(2.0, rel=1e-9)
        assert d["supersolution_sign"] < 0

    def test_dumbbell_no_root(self):
        c = find_stationary_candidate("dumbbell", (0.01, 0.99), N, w=0.4)
        assert not c.found

    def test_errors(self):
        with pytest.raises(ValueError, match="unregistered"):
            find_stationary_candidate("torus", (0, 1), N)
        with pytest.raises(ValueError, match="increasing"):
            find_stationary_candidate("bump_sphere", (1, 0), N)
        with pytest.raises(ValueError, match="even"):
            find_stationary_candidate("bump_sphere", (0, 1), 255)


class TestDetectStationarity:
    def test_round_sphere_empty(self, round_trace):
        assert detect_stationarity(round_trace, 0.1) == []
        assert detect_stationarity(round_trace, 0.5) == []

    def test_constant_h_flags_interior(self):
        trace = synthetic_trace([2.0] * 6)
        times = detect_stationarity(trace, 1e-12)
        interior = [r.t for r in trace.records[1:-1]]
        assert set(interior) <= set(times)

    def test_short_trace(self):
        with pytest.raises(ValueError):
            detect_stationarity(FlowTrace(synthetic_trace([1.0, 2.0]).records), 0.1)

    def test_flow_from_root(self):
        c = find_stationary_candidate("bump_sphere", (0.0, 1.0), N, w=0.5)
        trace = evolve(FlowState(c.profile), StepControl(t_end=0.01))
        first = trace.records[0]
        assert first.dh_dt == pytest.approx(ROOT_DH_DT, rel=1e-6)
        assert detect_stationarity(trace, 0.1) == []


def test_dumbbell_flow_threshold_holds(dumbbell_trace):
    assert all(r.threshold_ok for r in dumbbell_trace.records)
    assert all(r.papasoglu_ok for r in dumbbell_trace.records)
    assert dumbbell_trace.stop_reason == "t_end"


def test_bump_flow_stays_above_threshold(bump_trace):
    assert not any(r.threshold_ok for r in bump_trace.records)
    assert run_flow(bump_sphere(0.3, 0.5, 32), t_end=0.01).stop_reason == "t_end"
