import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from repsuff.scenarios import jinv_counterexample, jstate_counterexample, noise_mdp  # noqa: E402

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def jstate():
    return jstate_counterexample()


@pytest.fixture(scope="session")
def jinv():
    return jinv_counterexample()


@pytest.fixture(scope="session")
def noise():
    return noise_mdp(jstate_counterexample())


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
