import pytest

from gpxrl.dsl import base_grammar, parse_program
from gpxrl.env import EnvSpec

GOAL_LEFT_SRC = "(if (eq-obj? goal-obj (get $1 1 0)) left-action forward-action)"

# filled by test_acceptance; printed after the run so the verdicts are
# visible without -s
ACCEPTANCE_LINES = {}


@pytest.fixture(scope="session")
def grammar():
    return base_grammar()


@pytest.fixture(scope="session")
def goal_left(grammar):
    return parse_program(GOAL_LEFT_SRC, grammar)


@pytest.fixture(scope="session")
def wall_provider():
    return EnvSpec().dataset_provider()


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for key in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[key])
