"""Unit tests for the verification suites."""

import json

import pytest

from src.loggas.errors import ParameterError
from src.loggas.harness.suites import SUITES, Check, SuiteReport, below, close, run_suite


def test_close_and_below():
    assert close("x", 1.0, 1.0 + 1e-9, 1e-8).passed
    assert not close("x", 1.1, 1.0, 0.05, relative=True).passed
    assert not close("nan", float("nan"), 0.0, 1.0).passed
    assert below("b", 0.1, 1.0).passed


def test_empty_report_fails():
    assert not SuiteReport("empty").passed


def test_report_table_and_dict():
    report = SuiteReport("demo", [Check("a", 1.0, 1.0, 1e-8, True), Check("b", 2.0, 1.0, 1e-8, False)])
    assert not report.passed
    assert report.table().splitlines()[-1] == "demo: FAIL"
    payload = json.loads(json.dumps(report.to_dict()))
    assert [c["passed"] for c in payload["checks"]] == [True, False]


def test_unknown_suite():
    with pytest.raises(ParameterError):
        run_suite("nonexistent")


def test_registry_names():
    assert {"selberg-small-N", "theta", "two-cut-quartic", "heine", "fluctuations"} <= set(SUITES)


def test_theta_suite_passes():
    report = run_suite("theta", quick=True)
    assert report.passed, report.table()


@pytest.mark.slow
def test_selberg_suite_quick():
    report = run_suite("selberg-small-N", quick=True)
    assert report.passed, report.table()
