"""Shared pytest plumbing: the acceptance summary block.

Every test in test_acceptance.py corresponds to one shipped claim about
the toolkit.  This hook collects their outcomes and prints a compact
[ACCEPTANCE] line per claim at the end of the run, so the pass/fail/skip
state of the whole contract is visible at a glance.
"""

_ACCEPTANCE = {}


def _skip_reason(report):
    long = report.longrepr
    if isinstance(long, tuple) and len(long) == 3:
        msg = str(long[2])
        return msg.removeprefix("Skipped: ")
    return ""


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid:
        return
    name = report.nodeid.rsplit("::", 1)[-1].removeprefix("test_")
    if report.when == "setup":
        if report.skipped:
            _ACCEPTANCE[name] = ("SKIP", _skip_reason(report))
        elif report.failed:
            _ACCEPTANCE[name] = ("FAIL", "setup error")
    elif report.when == "call":
        if report.skipped:
            _ACCEPTANCE[name] = ("SKIP", _skip_reason(report))
        else:
            _ACCEPTANCE[name] = ("PASS" if report.passed else "FAIL", "")
    elif report.when == "teardown" and report.failed:
        _ACCEPTANCE[name] = ("FAIL", "teardown error")


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _ACCEPTANCE:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for name, (status, reason) in _ACCEPTANCE.items():
        line = f"[ACCEPTANCE] {name}: {status}"
        if reason:
            line += f" ({reason})"
        terminalreporter.write_line(line)
