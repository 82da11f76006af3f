import numpy as np
import pytest

from retarded.geometry import Ball, Box
from retarded.sources import (
    azimuthal_ball_current,
    band_limited,
    polarization_ball_current,
    uniform_ball_charge_q,
)


@pytest.fixture(scope="session")
def ball():
    return Ball((0.0, 0.0, 0.0), 1.0)


@pytest.fixture(scope="session")
def box():
    return Box((-1.0, -0.5, 0.0), (1.0, 0.5, 2.0))


@pytest.fixture(scope="session")
def charged_ball(ball):
    return uniform_ball_charge_q(ball, 1.0)


@pytest.fixture(scope="session")
def ring_current(ball):
    return azimuthal_ball_current(ball, 1.0)


@pytest.fixture(scope="session")
def mono(ball):
    return polarization_ball_current(ball, 1.0)


@pytest.fixture(scope="session")
def band(ball):
    return band_limited([
        (1.0, 1.0, polarization_ball_current(ball, 1.0)),
        (2.0, 0.5 - 0.25j, polarization_ball_current(ball, 2.0)),
    ])


def rel_err(a, b):
    a, b = np.asarray(a), np.asarray(b)
    return float(np.linalg.norm(a - b) / np.linalg.norm(b))


ACCEPTANCE_KEY = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[ACCEPTANCE_KEY] = []


@pytest.fixture
def criterion(request):
    """Records one PASS/FAIL line for the acceptance summary, then asserts."""

    def record(number: int, ok: bool, detail: str):
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"
        request.config.stash[ACCEPTANCE_KEY].append(line)
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(ACCEPTANCE_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
