import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

_results: dict[int, tuple[str, str]] = {}
_titles: dict[int, str] = {}


def pytest_collection_modifyitems(items):
    for item in items:
        m = item.get_closest_marker("criterion")
        if m is not None:
            _titles[m.args[0]] = m.args[1]


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    m = item.get_closest_marker("criterion")
    if m is None:
        return
    n = m.args[0]
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        if rep.skipped:
            reason = rep.longrepr[2] if isinstance(rep.longrepr, tuple) else ""
            status = ("SKIP", reason.removeprefix("Skipped: "))
        elif rep.failed:
            status = ("FAIL", "")
        else:
            status = ("PASS", "")
        prev = _results.get(n)
        # a criterion split over several tests fails if any part fails
        if prev is None or prev[0] == "PASS" or status[0] == "FAIL":
            _results[n] = status


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n in sorted(_results):
        status, note = _results[n]
        line = f"{status}  criterion {n:>2}: {_titles.get(n, '')}"
        tr.write_line(line + (f"  [{note}]" if note else ""))
