import numpy as np
import pytest

_CRITERIA = {}


@pytest.fixture
def rng():
    return np.random.Generator(np.random.PCG64(12345))


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or report.when not in ("setup", "call"):
        return
    n = marker.args[0]
    ok = report.passed if report.when == "call" else not report.failed
    where = item.cls.__name__ if item.cls else item.name
    prev_ok, prev_where = _CRITERIA.get(n, (True, where))
    ok = ok and not report.skipped
    _CRITERIA[n] = (prev_ok and ok, prev_where if not prev_ok else (where if ok else item.name))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        ok, name = _CRITERIA[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  ({name})")
