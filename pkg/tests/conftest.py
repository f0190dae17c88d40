"""Acceptance bookkeeping: tests marked ``criterion(n, title)`` are grouped and
reported as one PASS/FAIL line per criterion at the end of the session."""

from collections import defaultdict

import pytest

_outcomes = defaultdict(list)
_titles = {}
_measured = defaultdict(list)


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion this test belongs to")


def pytest_collection_modifyitems(items):
    for item in items:
        marker = item.get_closest_marker("criterion")
        if marker is not None:
            item.user_properties.append(("criterion", marker.args))


def pytest_runtest_logreport(report):
    props = dict(report.user_properties)
    if "criterion" not in props:
        return
    number, title = props["criterion"]
    _titles[number] = title
    if report.when == "call" or report.outcome != "passed":
        _outcomes[number].append(report.outcome == "passed")
    if report.when == "call":
        _measured[number].extend(v for k, v in report.user_properties if k == "measured")


def pytest_terminal_summary(terminalreporter):
    if not _titles:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_titles):
        status = "PASS" if _outcomes[number] and all(_outcomes[number]) else "FAIL"
        terminalreporter.write_line(f"criterion {number}: {status}  {_titles[number]}")
        for line in _measured[number]:
            terminalreporter.write_line(f"    {line}")


@pytest.fixture
def measured(record_property):
    """Attach a one-line measurement to the acceptance summary."""

    def note(text):
        record_property("measured", text)

    return note
