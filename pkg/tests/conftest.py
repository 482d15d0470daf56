import pathlib

import pytest

DATA = pathlib.Path(__file__).resolve().parents[1] / "data"

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def data_dir():
    return DATA


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
