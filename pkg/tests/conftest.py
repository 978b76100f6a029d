"""Shared fixtures and the acceptance summary printed at the end of a run."""

import re

import pytest

from gqcodes.codegraph import incidence_graph
from gqcodes.groupaction import automorphism_group

_CRITERIA: dict[int, tuple[str, str, float]] = {}
_ACCEPTANCE = re.compile(r"test_acceptance\.py::test_criterion_(\d+)_(\w+)")


@pytest.fixture(scope="session")
def graph2():
    return incidence_graph(2)


@pytest.fixture(scope="session")
def graph3():
    return incidence_graph(3)


@pytest.fixture(scope="session")
def group2(graph2):
    return automorphism_group(graph2)


@pytest.fixture(scope="session")
def group3(graph3):
    return automorphism_group(graph3)


def pytest_runtest_logreport(report):
    m = _ACCEPTANCE.search(report.nodeid)
    if not m:
        return
    num, name = int(m.group(1)), m.group(2).replace("_", " ")
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        outcome = "PASS" if report.outcome == "passed" else report.outcome.upper()
        if outcome == "FAILED":
            outcome = "FAIL"
        _CRITERIA[num] = (name, outcome, report.duration)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_CRITERIA):
        name, outcome, secs = _CRITERIA[num]
        terminalreporter.write_line(f"criterion {num:2d} {outcome:<7} {secs:8.2f}s  {name}")
