import pytest

from ocpd.testkit import fixture_l1, fixture_l2

ACCEPTANCE_LINES = []


@pytest.fixture
def l1():
    return fixture_l1()


@pytest.fixture
def l2():
    return fixture_l2()


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip("."))):
            terminalreporter.write_line(line)
