from importlib import resources

import pytest

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def fixture_dir():
    return resources.files("esaretro") / "data" / "fixture"


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
