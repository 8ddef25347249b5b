"""Shared fixtures for the test suite.

The ``acceptance`` fixture records one verdict line per acceptance criterion
and replays the lines into the terminal summary, so they are visible even
when pytest captures stdout.
"""

import pytest

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def acceptance():
    def report(number: int, name: str, passed: bool) -> str:
        line = f"ACCEPTANCE {number} {name}: {'PASS' if passed else 'FAIL'}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return line

    return report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
