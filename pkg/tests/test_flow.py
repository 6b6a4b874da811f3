"""RK4 method-of-lines integration of du/dt = -K."""

import math

import numpy as np
import pytest

from cheeger_flow import (
    FlowError,
    FlowState,
    StepControl,
    area_law_check,
    bump_sphere,
    dumbbell,
    evolve,
    flow_rhs,
    gaussian_curvature,
    monotonicity_check,
    round_sphere,
    step,
)
from cheeger_flow.flow import STOP_AREA, STOP_CURVATURE, STOP_T_END, exact_constant_u, stable_dt
from cheeger_flow.identities import strictly_increasing

from conftest import N, run_flow


class TestStepControl:
    @pytest.mark.parametrize("cfl", [0.0, -0.1, 0.51, 0.9])
    def test_cfl_range(self, cfl):
        with pytest.raises(ValueError, match="cfl"):
            StepControl(cfl_factor=cfl)

    def test_dt_order(self):
        with pytest.raises(ValueError):
            StepControl(dt_min=1e-2, dt_max=1e-3)

    def test_min_area_positive(self):
        with pytest.raises(ValueError):
            StepControl(min_area=0.0)

    def test_stable_dt_scales_with_grid(self):
        c = StepControl()
        assert stable_dt(round_sphere(1, 64), c) == pytest.approx(4 * stable_dt(round_sphere(1, 128), c))

    def test_dt_min_floor_warns(self, caplog):
        c = StepControl(dt_min=1e-3, dt_max=1e-2)
        assert stable_dt(round_sphere(1, 256), c) == 1e-3
        assert "below dt_min" in caplog.text


class TestRhs:
    def test_unit_sphere(self, unit_sphere):
        np.testing.assert_allclose(flow_rhs(unit_sphere), -1.0, atol=1e-12)

    def test_radius_two(self, radius_two):
        np.testing.assert_allclose(flow_rhs(radius_two), -0.25, atol=1e-12)

    def test_is_minus_curvature(self):
        p = dumbbell(0.5, 0.4, N)
        np.testing.assert_array_equal(flow_rhs(p), -gaussian_curvature(p))


class TestStep:
    def test_unit_sphere_one_step(self, unit_sphere):
        dt = 1e-3
        s = step(FlowState(unit_sphere), StepControl(), dt)
        np.testing.assert_allclose(s.profile.u, exact_constant_u(0.0, dt), atol=1e-13)
        assert abs(s.profile.u[0] + dt) < 2 * dt**2
        assert s.step_count == 1 and s.last_dt == dt and s.time == dt

    def test_rk4_order(self):
        p = round_sphere(1.0, 32)
        errs = []
        for dt in (0.04, 0.02):
            u = step(FlowState(p), StepControl(dt_max=0.1), dt).profile.u[0]
            errs.append(abs(u - exact_constant_u(0.0, dt)))
        assert errs[0] / errs[1] > 25  # local error O(dt^5)

    def test_mirror_symmetry_preserved(self):
        s = FlowState(bump_sphere(0.4, 0.3, N))
        for _ in range(20):
            s = step(s, StepControl())
        np.testing.assert_allclose(s.profile.u, s.profile.u[::-1], atol=1e-14)

    def test_blow_up_raises(self):
        with np.errstate(all="ignore"):
            with pytest.raises(FlowError) as err:
                step(FlowState(round_sphere(1.0, 64)), StepControl(), dt=1e3)
        assert err.value.last_state.step_count == 0


class TestEvolve:
    def test_unit_sphere_area(self, round_trace):
        t = run_flow(round_sphere(1.0, N), t_end=0.25)
        assert t.stop_reason == STOP_T_END
        assert t.records[-1].t == 0.25
        assert t.records[-1].area == pytest.approx(2 * math.pi, rel=1e-12)

    def test_unit_sphere_to_045(self):
        t = run_flow(round_sphere(1.0, 64), t_end=0.45)
        assert t.records[-1].area == pytest.approx(0.4 * math.pi, rel=1e-10)
        assert strictly_increasing(t)
        h = t.column("h_sum_global")
        np.testing.assert_allclose(h, 2 / np.sqrt(1 - 2 * t.column("t")), rtol=1e-10)

    def test_area_floor_stop(self):
        t = run_flow(round_sphere(1.0, 64), t_end=1.0, min_area=5.0)
        assert t.stop_reason == STOP_AREA
        assert t.records[-1].stop_reason == STOP_AREA
        assert t.records[-1].t == pytest.approx((4 * math.pi - 5) / (8 * math.pi), abs=1e-3)
        assert t.records[-2].area > 5.0 >= t.records[-1].area

    def test_curvature_cap_stop(self):
        t = run_flow(dumbbell(0.5, 0.4, 64), max_curvature=10.0)
        assert t.stop_reason == STOP_CURVATURE
        assert len(t) == 1

    def test_observer_sees_every_record(self):
        seen = []
        trace = evolve(
            FlowState(round_sphere(1.0, 32)),
            StepControl(t_end=0.01),
            lambda s, r: seen.append((s.step_count, r.t)),
        )
        assert [k for k, _ in seen] == list(range(len(trace)))
        assert trace.final_state.step_count == len(trace) - 1

    def test_radius_flow_closed_form(self):
        r0 = 1.5
        t = run_flow(round_sphere(r0, 64), t_end=0.3)
        u = t.final_state.profile.u
        np.testing.assert_allclose(np.exp(2 * u), r0**2 - 2 * 0.3, rtol=1e-10)

    def test_time_and_area_strictly_monotone(self, bump_trace):
        assert np.all(np.diff(bump_trace.column("t")) > 0)
        assert np.all(np.diff(bump_trace.column("area")) < 0)


class TestAreaLaw:
    def test_single_record(self):
        t = run_flow(round_sphere(1.0, 32), t_end=0.0)
        assert len(t) == 1
        assert area_law_check(t) == 0.0

    def test_unit_sphere(self, round_trace):
        assert area_law_check(round_trace) <= 1e-6

    def test_bump(self, bump_trace):
        assert area_law_check(bump_trace) <= 1e-5

    def test_dumbbell_monotone_to_01(self, dumbbell_trace):
        early = type(dumbbell_trace)([r for r in dumbbell_trace.records if r.t <= 0.1])
        assert monotonicity_check(early, 1e-6) == []
