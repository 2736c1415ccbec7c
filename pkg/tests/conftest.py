import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One PASS/FAIL line per acceptance criterion at the end of a run."""
    stats = terminalreporter.stats
    lines = {}
    for outcome in ("passed", "failed", "error"):
        for report in stats.get(outcome, []):
            nodeid = getattr(report, "nodeid", "")
            when = getattr(report, "when", "call")
            if "test_acceptance.py" in nodeid and when == "call":
                name = nodeid.split("::")[-1]
                lines[name] = "PASS" if outcome == "passed" else "FAIL"
    if lines:
        terminalreporter.write_sep("=", "acceptance criteria")
        for name in sorted(lines):
            terminalreporter.write_line(f"{lines[name]} {name}")
