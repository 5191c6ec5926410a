"""End-to-end acceptance suite.

One test per shipped guarantee, each delegating to the matching entry in
flowparam.checks and asserting both the verdict and the wall-time budget.
Details are printed so a failing run carries the measured numbers.
"""

import os

import pytest

from flowparam import checks


def _run(fn, budget_seconds, **kw):
    result = fn(**kw)
    status = "PASS" if result.passed else "FAIL"
    print(f"{result.name} {status} ({result.seconds:.1f}s): {result.detail}")
    assert result.passed, result.detail
    assert result.seconds < budget_seconds, (
        f"{result.name} took {result.seconds:.1f}s, "
        f"budget {budget_seconds}s")


def _workers():
    return min(4, os.cpu_count() or 1)


def test_acceptance_01_graph_polynomial_oracle():
    _run(checks.check_graph_oracle, 1.0)


def test_acceptance_02_psd_and_homogeneity():
    _run(checks.check_psd_homogeneity, 30.0)


def test_acceptance_03_scaling_split_exponents():
    _run(checks.check_scaling_split, 60.0)


@pytest.mark.slow
def test_acceptance_04_oneloop_oracle_match():
    _run(checks.check_oneloop_oracle, 600.0, workers=_workers())


@pytest.mark.slow
def test_acceptance_05_threshold_continuity():
    _run(checks.check_threshold_continuity, 900.0, workers=_workers())


@pytest.mark.slow
def test_acceptance_06_shell_summability():
    _run(checks.check_shell_summability, 600.0)


def test_acceptance_07_resonant_measure_bound():
    _run(checks.check_measure_bound, 10.0)


def test_acceptance_08_onshell_twopoint_window():
    _run(checks.check_onshell_twopoint, 60.0)


@pytest.mark.slow
def test_acceptance_09_twoloop_structure_audit():
    _run(checks.check_twoloop_structure, 300.0)


@pytest.mark.slow
def test_acceptance_10_deterministic_reruns():
    _run(checks.check_determinism, 300.0)
