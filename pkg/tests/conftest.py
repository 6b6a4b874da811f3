import math

import pytest

from cheeger_flow import FlowState, StepControl, bump_sphere, dumbbell, evolve, round_sphere

N = 256
T_END = 0.2


def run_flow(profile, t_end=T_END, **control):
    return evolve(FlowState(profile), StepControl(t_end=t_end, **control))


@pytest.fixture(scope="session")
def round_trace():
    return run_flow(round_sphere(1.0, N))


@pytest.fixture(scope="session")
def bump_trace():
    return run_flow(bump_sphere(0.3, 0.5, N))


@pytest.fixture(scope="session")
def dumbbell_trace():
    return run_flow(dumbbell(0.5, 0.4, N))


@pytest.fixture(scope="session")
def acceptance_traces(round_trace, bump_trace, dumbbell_trace):
    return {"round_sphere": round_trace, "bump_sphere": bump_trace, "dumbbell": dumbbell_trace}


@pytest.fixture
def unit_sphere():
    return round_sphere(1.0, N)


@pytest.fixture
def radius_two():
    return round_sphere(2.0, N)


def equator(p):
    return p.grid.n_intervals // 2


FOUR_PI = 4 * math.pi


ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[k])
