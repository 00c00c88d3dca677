import re

from hypothesis import settings

settings.register_profile("suite", max_examples=40, deadline=None)
settings.load_profile("suite")

_RESULTS: dict[int, tuple[str, str, str]] = {}
_NAME = re.compile(r"test_criterion_(\d+)_(\w+)")


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid:
        return
    m = _NAME.search(report.nodeid)
    if not m:
        return
    n, title = int(m.group(1)), m.group(2).replace("_", " ")
    if report.when == "call" or report.failed:
        reason = ""
        if report.failed:
            crash = getattr(report.longrepr, "reprcrash", None)
            reason = crash.message.splitlines()[0] if crash else "error"
        if n not in _RESULTS or report.failed:
            _RESULTS[n] = (title, "PASS" if report.passed else "FAIL", reason)


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_RESULTS):
        title, status, reason = _RESULTS[n]
        line = f"criterion {n:2d} {status}: {title}"
        if reason:
            line += f"  ({reason})"
        terminalreporter.write_line(line)
