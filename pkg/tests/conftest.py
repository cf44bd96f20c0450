"""Shared fixtures and the acceptance summary hook."""

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

import acceptance_log
from enkflab import Lorenz63, NavierStokes2D, RngStream, SpectralGrid

settings.register_profile(
    "suite",
    derandomize=True,
    max_examples=50,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")


@pytest.fixture
def rng():
    return np.random.default_rng(20260815)


@pytest.fixture
def stream():
    return RngStream(7)


@pytest.fixture(scope="session")
def grid12():
    return SpectralGrid(12)


@pytest.fixture(scope="session")
def grid16():
    return SpectralGrid(16)


@pytest.fixture(scope="session")
def l63():
    return Lorenz63(dt_internal=0.01)


@pytest.fixture(scope="session")
def nse_small():
    # 16 points -> cutoff 5, 60 modes, 120 slots; big enough to exercise
    # every code path (including the default forcing mode) while keeping
    # transforms cheap
    return NavierStokes2D(n=16, dt_internal=0.005)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not acceptance_log.lines:
        return
    terminalreporter.section("acceptance criteria")
    for line in acceptance_log.lines:
        terminalreporter.write_line(line)
