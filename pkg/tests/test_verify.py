import pytest

from qdgraph.verify import ANCHORS, run_suite, format_report


@pytest.fixture(scope="module")
def checks():
    return run_suite()


def test_suite_passes(checks):
    failed = [c.line() for c in checks if not c.passed]
    assert failed == []


def test_every_numeric_check_reports_threshold(checks):
    for c in checks:
        if c.measured is not None:
            assert c.threshold is not None and c.measured <= c.threshold


def test_report_summary_line(checks):
    report = format_report(checks)
    assert report.splitlines()[-1] == f"{len(checks)}/{len(checks)} checks passed"


def test_report_lists_anchor_classes(checks):
    report = format_report(checks)
    for label in ANCHORS:
        assert label in report


def test_tiny_tolerance_is_a_negative_control():
    # Every numeric measurement is positive, so a 1e-20 threshold must fail some.
    checks = run_suite(tol=1e-20)
    assert any(not c.passed for c in checks if c.measured is not None)
