import pytest

from pks_selfsimilar import find_critical, lane_emden, make_params

# lines collected by test_acceptance.py, echoed in the terminal summary
ACCEPTANCE_LINES: dict[int, str] = {}


@pytest.fixture(scope="session")
def params3():
    return make_params(3)


@pytest.fixture(scope="session")
def crit3(params3):
    return find_critical(params3, tol=1e-8)


@pytest.fixture(scope="session")
def lane3(params3):
    return lane_emden(params3)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])
