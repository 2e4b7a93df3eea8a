import math

import pytest

from src.experiment.config import ExperimentConfig
from src.experiment.rate_study import (
    rate_bandwidths,
    run_rate_cell,
    run_rate_experiment,
    write_rate_outputs,
)


def test_bandwidths_follow_the_sparse_rates():
    cfg = ExperimentConfig(rate_constant_mean=0.6, rate_constant_cov=0.6)

    h_mu, h_sigma = rate_bandwidths(cfg, 1600)

    assert h_mu == pytest.approx(0.6 * 1600**-0.2)
    assert h_sigma == pytest.approx(0.6 * 1600 ** (-1 / 6))


def test_bandwidths_are_capped():
    assert rate_bandwidths(ExperimentConfig(rate_constant_mean=5.0), 10)[0] == 1.0


def test_single_cell():
    cfg = ExperimentConfig(t=5, binned=True, bin_count=50, seed=2)

    row = run_rate_cell(cfg, 0, 100)

    assert row.status == "ok"
    assert row.mise_mu > 0 and row.mise_sigma > 0


def test_outputs_from_a_short_study(tmp_path):
    cfg = ExperimentConfig(
        t=5, reps=2, n_values=(50, 100, 200), binned=True, bin_count=50, seed=4
    )
    outcome = run_rate_experiment(cfg)

    paths = write_rate_outputs(cfg, outcome, tmp_path)

    assert [path.name for path in paths] == ["rates.csv", "rates.txt"]
    assert len(outcome.rows) == 6
    assert math.isfinite(outcome.slope_mean)
    assert [check.name for check in outcome.checks] == ["mean-rate", "cov-rate"]
    lines = (tmp_path / "rates.csv").read_text(encoding="utf-8").splitlines()
    assert lines[1] == "rep,n,h_mu,h_sigma,mise_mu,mise_sigma,status"
    assert len(lines) == 2 + 6


@pytest.mark.slow
def test_sparse_rates_are_recovered():
    cfg = ExperimentConfig(
        t=5, reps=30, n_values=(100, 200, 400, 800, 1600), binned=True, bin_count=100
    )

    outcome = run_rate_experiment(cfg)

    assert all(check.passed for check in outcome.checks), outcome.checks
