"""Per-criterion pass/fail summary for tests marked ``@pytest.mark.criterion``."""

import pytest

_criteria = {}
_outcomes = {}


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("criterion")
        if mark is not None:
            _criteria[item.nodeid] = (mark.args[0], mark.args[1])


def pytest_runtest_logreport(report):
    if report.nodeid not in _criteria:
        return
    if report.when == "call" or report.outcome != "passed":
        prev = _outcomes.get(report.nodeid, "passed")
        _outcomes[report.nodeid] = report.outcome if prev == "passed" else prev


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    merged = {}
    for nodeid, outcome in _outcomes.items():
        key = _criteria[nodeid]
        ok = outcome == "passed"
        merged[key] = merged.get(key, True) and ok
    terminalreporter.section("acceptance criteria")
    for (num, title), ok in sorted(merged.items()):
        terminalreporter.write_line(f"criterion {num}: {'PASS' if ok else 'FAIL'}  {title}")


@pytest.fixture(scope="session")
def golden_dir(pytestconfig):
    return pytestconfig.rootpath / "tests" / "golden"
