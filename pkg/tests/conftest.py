import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

_criteria: dict[int, dict] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


def pytest_collection_modifyitems(items):
    for item in items:
        m = item.get_closest_marker("criterion")
        if m is not None:
            n, title = m.args
            _criteria.setdefault(n, {"title": title, "outcomes": []})
            item.user_properties.append(("criterion", n))


def pytest_runtest_logreport(report):
    n = dict(report.user_properties).get("criterion")
    if n is None:
        return
    if report.when == "call" or report.outcome != "passed":
        _criteria[n]["outcomes"].append(report.outcome)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_criteria):
        c = _criteria[n]
        ok = c["outcomes"] and all(o == "passed" for o in c["outcomes"])
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  criterion {n:2d}: {c['title']}")
