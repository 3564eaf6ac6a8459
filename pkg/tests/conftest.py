import functools

import pytest

from qdgraph.qdiff import from_apex
from qdgraph.tracer import build_critical_graph

ANCHOR_APEXES = {
    "1.6+2i": 1.6 + 2j,
    "1.8+2i": 1.8 + 2j,
    "1.55+2i": 1.55 + 2j,
    "0.5+2i": 0.5 + 2j,
    "2i": 2j,
}


@functools.lru_cache(maxsize=None)
def anchor_graph(a: complex):
    """Critical graph for an apex, shared across tests."""
    return build_critical_graph(from_apex(a))


@pytest.fixture
def graph_for():
    return anchor_graph


_ACCEPTANCE_LINES: list = []


@pytest.fixture
def report_criterion():
    """Record one PASS/FAIL line for the terminal summary and return it."""

    def record(number: int, passed: bool, detail: str, seconds: float) -> str:
        line = f"criterion {number}: {'PASS' if passed else 'FAIL'} ({seconds:.2f} s) {detail}"
        _ACCEPTANCE_LINES.append((number, line))
        print(line)
        return line

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(_ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
