"""Acceptance checks, including fault injection into the kernel."""
from __future__ import annotations

from unittest.mock import patch

import numpy as np
import pytest

from src.experiment import verify
from src.reporting.models import CheckResult


def _bent_epanechnikov(u):
    u = np.asarray(u, dtype=np.float64)
    return np.where(np.abs(u) <= 1.0, 0.7 * (1.0 - np.abs(u)) + 0.05, 0.0)


@pytest.mark.parametrize(
    "check",
    [
        verify.check_affine_reproduction,
        lambda: verify.check_normal_equations_oracle(10),
        lambda: verify.check_weight_normalization(200),
        verify.check_binning_lossless_on_nodes,
        verify.check_simulation_law,
        verify.check_bruteforce_identity,
        verify.check_empty_input,
    ],
    ids=[
        "affine",
        "oracle",
        "weights",
        "lossless",
        "simulation-law",
        "bruteforce",
        "empty-input",
    ],
)
def test_fast_checks_pass(check):
    result = check()

    assert result.passed, result


def test_binned_matches_exact():
    result = verify.check_binned_matches_exact()

    assert result.passed, result
    assert result.measured <= 0.01


def test_determinism():
    result = verify.check_determinism()

    assert result.passed, result


class TestFaultInjection:
    def test_oracle_detects_a_wrong_kernel(self):
        with patch("src.smoothing.kernels.epanechnikov", _bent_epanechnikov):
            result = verify.check_normal_equations_oracle(10)

        assert not result.passed
        assert result.measured > 1e-6

    def test_affine_reproduction_holds_for_any_kernel(self):
        with patch("src.smoothing.kernels.epanechnikov", _bent_epanechnikov):
            result = verify.check_affine_reproduction()

        assert result.passed


class TestRunChecks:
    def test_crashing_check_counts_as_failed(self):
        def boom() -> CheckResult:
            raise RuntimeError("kaput")

        def fine() -> CheckResult:
            return CheckResult("fine", 0.0, "-", True)

        with patch.dict(verify.CHECKS, {"boom": boom, "fine": fine}, clear=True):
            results = verify.run_checks()

        assert [r.passed for r in results] == [False, True]
        assert "kaput" in results[0].detail

    def test_full_adds_the_studies(self):
        def study(executor):
            return [CheckResult("study", 1.0, "-", True)]

        with patch.dict(verify.CHECKS, {}, clear=True), patch.object(
            verify, "FULL_CHECKS", (study,)
        ):
            results = verify.run_checks(full=True, threads=2)

        assert [r.name for r in results] == ["study"]


def test_desk_config_overrides():
    cfg = verify.desk_config(n=30)

    assert cfg.n == 30 and cfg.binned and cfg.seed == verify.VERIFY_SEED


@pytest.mark.slow
def test_full_studies_pass():
    with verify.ThreadPoolExecutor(max_workers=4) as pool:
        results = verify.check_rate_slopes(pool) + verify.check_phase_shape(pool)

    assert all(r.passed for r in results), results
