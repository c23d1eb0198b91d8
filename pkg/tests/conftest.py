"""Shared pytest wiring for the acceptance gate.

Acceptance tests record one verdict line per criterion; the terminal
summary prints them after the run so the verdicts survive output capture.
"""

ACCEPTANCE_LINES: list[tuple[int, str]] = []


def record_acceptance(number: int, line: str) -> None:
    ACCEPTANCE_LINES.append((number, line))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(line)
