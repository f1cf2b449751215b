import math

import pytest
from hypothesis import HealthCheck, settings

from korobov_exp.space import WeightedSpace

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def unit_space():
    """s = 1, a = b = 1, omega = 1/2: eigenvalues 1, 1/2, 1/2, 1/4, 1/4, ..."""
    return WeightedSpace(1, 0.5, [1], [1])


@pytest.fixture
def spt_family():
    return {"family": "exponential", "delta": 1.0}, {"family": "power", "kappa": 2.0}


def rel(x, y):
    return abs(x - y) / max(abs(y), 1e-300)


def geometric_trace(omega, s):
    return (1 + 2 * omega / (1 - omega)) ** s




ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for key in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[key])
