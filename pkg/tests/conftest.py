"""Shared pytest wiring: surface acceptance-criterion verdicts in the summary."""

import sys


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    module = sys.modules.get("tests.test_acceptance") or sys.modules.get(
        "test_acceptance"
    )
    if module is None:
        return
    lines = getattr(module, "REPORT_LINES", {})
    if not lines:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for number in sorted(lines):
        terminalreporter.write_line(lines[number])
