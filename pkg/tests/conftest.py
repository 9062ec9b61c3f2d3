import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

import acceptance_report  # noqa: E402


def pytest_terminal_summary(terminalreporter):
    lines = acceptance_report.lines()
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for line in lines:
        terminalreporter.write_line(line)
    for k in sorted(acceptance_report.RESULTS):
        for label, ok, detail in acceptance_report.RESULTS[k]:
            terminalreporter.write_line(f"    {k:2d} {label}: {'pass' if ok else 'FAIL'} {detail}")
