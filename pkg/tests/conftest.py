import pytest

_CRITERIA_LINES = []


@pytest.fixture
def report_criterion():
    """Record (and print) one pass/fail line for an acceptance criterion."""

    def record(number: int, passed: bool, detail: str) -> None:
        line = f"{'PASS' if passed else 'FAIL'} criterion {number}: {detail}"
        _CRITERIA_LINES.append((number, line))
        print(line)

    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(_CRITERIA_LINES):
        terminalreporter.write_line(line)
