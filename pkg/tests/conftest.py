import re
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent))

_AC = re.compile(r"test_ac(\d+)_")
_results: dict[int, list[bool]] = {}
_titles: dict[int, str] = {}


def pytest_runtest_logreport(report):
    m = _AC.search(report.nodeid)
    if not m:
        return
    k = int(m.group(1))
    if report.when == "call" or report.failed or report.skipped:
        _results.setdefault(k, []).append(report.passed and not report.skipped)


def pytest_collection_modifyitems(items):
    for item in items:
        m = _AC.search(item.nodeid)
        if m and item.function.__doc__:
            _titles.setdefault(int(m.group(1)), item.function.__doc__.strip().splitlines()[0])


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(_results):
        ok = all(_results[k])
        terminalreporter.write_line(f"AC{k} {'PASS' if ok else 'FAIL'}: {_titles.get(k, '')}")
