import os

import pytest
from hypothesis import HealthCheck, settings

from autoion.params import figure_params

settings.register_profile(
    "default",
    max_examples=int(os.environ.get("HYPOTHESIS_MAX_EXAMPLES", 60)),
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def fig2b():
    """q_a = q_b = gamma_a = gamma_b = 1, resonant, Omega = 1."""
    return figure_params(1.0, 1.0, 1.0, 1.0, 1.0)


@pytest.fixture
def fig6():
    return figure_params(1.0, 1.0, 1.0, 1.0, 4.0)
