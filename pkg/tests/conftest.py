import pytest

from skewmirror.acceptance import Pipeline
from skewmirror.novikov import ThetaParams, theta_coeffs

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def generic():
    """Pipeline at (t, s, q0, K) = (0.2, 0.13, 0.25, 6), shared across modules."""
    return Pipeline()


@pytest.fixture(scope="session")
def commutative_abc():
    return theta_coeffs(ThetaParams(0, 0.5, 0.3, 6))


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
