import os
import sys

sys.path.insert(0, os.path.dirname(__file__))

import _report  # noqa: E402


def pytest_terminal_summary(terminalreporter):
    if _report.LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_report.LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
