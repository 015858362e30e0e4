import math

import numpy as np
import pytest
from hypothesis import strategies as st

from lepskij.model import validate_params
from lepskij.schedule import Grid

CONFIG_A = dict(gamma=2.0, lam=1.0, epsilon=0.0, eta=1.0, delta=1e-7, omega0=50.0, omega=2.0)
K_MAX_A = 16384

# filled by test_acceptance, echoed after the run
ACCEPTANCE_LINES = {}


@pytest.fixture
def params_a():
    return validate_params(**CONFIG_A)


@pytest.fixture
def grid_a(params_a):
    return Grid.for_params(params_a, K_MAX_A)


def random_params(rng):
    """One valid parameter set from the distribution used by the randomized analytic checks."""
    while True:
        omega0 = rng.uniform(2, 100)
        omega = rng.uniform(1.1, 4)
        if omega0 * omega > omega0 + 1:
            break
    lam = rng.uniform(0.05, 3)
    return validate_params(
        gamma=rng.uniform(0.55, 4), lam=lam, epsilon=rng.uniform(-lam + 0.01, 2),
        eta=10 ** rng.uniform(-3, 3), delta=10 ** rng.uniform(-9, -1),
        omega0=omega0, omega=omega)


def random_grid(params, levels=12, cap=200_000):
    k_max = min(cap, int(params.omega0 * params.omega ** levels) + 2)
    return Grid.for_params(params, k_max)


@st.composite
def valid_params(draw, max_omega0=100.0):
    omega = draw(st.floats(1.1, 4.0))
    omega0 = draw(st.floats(max(2.0, 1.0 / (omega - 1) + 0.01), max_omega0))
    lam = draw(st.floats(0.05, 3.0))
    eps = draw(st.floats(-lam + 0.01, 2.0))
    return validate_params(
        gamma=draw(st.floats(0.55, 4.0)), lam=lam, epsilon=eps,
        eta=draw(st.floats(1e-3, 1e3)), delta=draw(st.floats(1e-9, 1e-1)),
        omega0=omega0, omega=omega)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])
