import math

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from calabi_lab.geometry import GeometryConfig

settings.register_profile(
    "default",
    max_examples=15,
    deadline=None,
    suppress_health_check=[HealthCheck.function_scoped_fixture],
)
settings.load_profile("default")

# filled in by test_acceptance; printed at the end of the session
ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])


@pytest.fixture
def torus64():
    return GeometryConfig(backend="torus", grid_n=64, period=2 * math.pi)


@pytest.fixture
def torus32():
    return GeometryConfig(backend="torus", grid_n=32, period=2 * math.pi)


@pytest.fixture
def toric64():
    return GeometryConfig(backend="toric", grid_n=64, polytope_length=1.0)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
