"""Sparse-regime convergence-rate study.

For each sample size ``n`` the study simulates a single variable observed
``T`` times per subject, smooths the mean at ``h = c n^(-1/5)`` and the
covariance at ``h = c n^(-1/6)``, and averages the MISEs over replications.
The log-log slopes of the averages against ``n`` estimate the rates.
"""
from __future__ import annotations

import csv
import logging
import math
from concurrent.futures import Executor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from src.data.io import format_metadata
from src.evaluation.rates import fit_rate_slope
from src.evaluation.sweep import bandwidth_sweep_cov, bandwidth_sweep_mean, centering_means
from src.exceptions import FdaError
from src.experiment.config import ExperimentConfig
from src.experiment.result_store import ThreadSafeResultStore
from src.experiment.seeds import cell_seed
from src.reporting.context import RateContext, fmt, summary_block
from src.reporting.models import CheckResult
from src.reporting.render import render_rate_summary, write_text
from src.simulation.generator import generate_dataset

logger = logging.getLogger(__name__)

__all__ = [
    "RateOutcome",
    "rate_bandwidths",
    "run_rate_cell",
    "run_rate_experiment",
    "write_rate_outputs",
]

# Accepted slope ranges around the sparse-regime rates n^(-4/5) and n^(-2/3).
MEAN_SLOPE_BOUNDS: Tuple[float, float] = (-1.1, -0.5)
COV_SLOPE_BOUNDS: Tuple[float, float] = (-0.95, -0.4)

# Rate-study cells are keyed by (rep, n); the constant tags them apart from phase cells.
_RATE_TAG = 1

RATE_HEADER = ("rep", "n", "h_mu", "h_sigma", "mise_mu", "mise_sigma", "status")


@dataclass(frozen=True, slots=True)
class RateRow:
    rep: int
    n: int
    h_mu: float
    h_sigma: float
    mise_mu: float
    mise_sigma: float
    status: str = "ok"


@dataclass(slots=True)
class RateOutcome:
    rows: List[RateRow]
    n_values: List[int]
    mean_mise: List[float]
    cov_mise: List[float]
    slope_mean: float = math.nan
    slope_cov: float = math.nan
    checks: List[CheckResult] = field(default_factory=list)


def rate_bandwidths(cfg: ExperimentConfig, n: int) -> Tuple[float, float]:
    """``(c_mu n^(-1/5), c_sigma n^(-1/6))``, capped at 1."""
    h_mu = min(cfg.rate_constant_mean * n ** -0.2, 1.0)
    h_sigma = min(cfg.rate_constant_cov * n ** (-1.0 / 6.0), 1.0)
    return h_mu, h_sigma


def run_rate_cell(cfg: ExperimentConfig, rep: int, n: int) -> RateRow:
    """One replication at sample size *n* with a single variable."""
    h_mu, h_sigma = rate_bandwidths(cfg, n)
    seed = cell_seed(cfg.seed, _RATE_TAG, rep, n)
    sim = cfg.simulation(n=n, p=1, t=cfg.t, seed=seed)
    settings = cfg.sweep_settings()
    grid = cfg.grid()
    try:
        data, truth = generate_dataset(sim)
        mean_report = bandwidth_sweep_mean(data, truth, [h_mu], grid, settings)
        means = centering_means(data, truth, mean_report, grid, settings, cfg.centering)
        cov_report = bandwidth_sweep_cov(data, truth, [h_sigma], grid, means, settings)
        mise_mu = float(mean_report.mise_mean[0, 0])
        mise_sigma = float(cov_report.mise_cov[0, 0, 0])
    except FdaError as exc:
        logger.warning("Rate cell rep=%d n=%d failed: %s", rep, n, exc)
        return RateRow(rep, n, h_mu, h_sigma, math.nan, math.nan, "failed")
    status = "ok" if math.isfinite(mise_mu) and math.isfinite(mise_sigma) else "failed"
    return RateRow(rep, n, h_mu, h_sigma, mise_mu, mise_sigma, status)


def _average(values: List[float]) -> float:
    ok = [v for v in values if math.isfinite(v)]
    return math.fsum(ok) / len(ok) if ok else math.nan


def _slope_check(name: str, slope: float, bounds: Tuple[float, float]) -> CheckResult:
    lo, hi = bounds
    return CheckResult(
        name,
        slope,
        f"[{lo:g}, {hi:g}]",
        lo <= slope <= hi,
        f"log-log slope of {name.split('-')[0]} MISE against n",
    )


def _fit(n_values: List[int], averages: List[float]) -> float:
    try:
        slope, _ = fit_rate_slope(n_values, averages)
    except (FdaError, ValueError) as exc:
        logger.warning("Rate slope fit failed: %s", exc)
        return math.nan
    return slope


def run_rate_experiment(
    cfg: ExperimentConfig, *, executor: Optional[Executor] = None
) -> RateOutcome:
    """Run ``reps`` replications for every ``n`` and fit both slopes."""
    n_values = sorted(set(cfg.n_values))
    keys = [(rep, n) for rep in range(cfg.reps) for n in n_values]
    store: ThreadSafeResultStore[Tuple[int, int], RateRow] = ThreadSafeResultStore(
        max_cells=len(keys)
    )
    logger.info("Rate experiment: %d cells (n=%s, T=%d)", len(keys), n_values, cfg.t)

    def _run(key: Tuple[int, int]) -> None:
        store.add(key, run_rate_cell(cfg, *key))

    if executor is None:
        for key in keys:
            _run(key)
    else:
        for future in [executor.submit(_run, key) for key in keys]:
            future.result()

    rows = [row for _, row in store.sorted_items()]
    by_n: Dict[int, List[RateRow]] = {n: [] for n in n_values}
    for row in rows:
        by_n[row.n].append(row)
    mean_mise = [_average([r.mise_mu for r in by_n[n]]) for n in n_values]
    cov_mise = [_average([r.mise_sigma for r in by_n[n]]) for n in n_values]

    outcome = RateOutcome(rows, n_values, mean_mise, cov_mise)
    outcome.slope_mean = _fit(n_values, mean_mise)
    outcome.slope_cov = _fit(n_values, cov_mise)
    outcome.checks = [
        _slope_check("mean-rate", outcome.slope_mean, MEAN_SLOPE_BOUNDS),
        _slope_check("cov-rate", outcome.slope_cov, COV_SLOPE_BOUNDS),
    ]
    failed = sum(row.status != "ok" for row in rows)
    if failed:
        logger.warning("Rate experiment: %d/%d cells failed", failed, len(rows))
    return outcome


def _value(value: float) -> str:
    return repr(value) if math.isfinite(value) else ""


def write_rate_outputs(
    cfg: ExperimentConfig, outcome: RateOutcome, out_dir: str | Path
) -> List[Path]:
    """Write ``rates.csv`` (one row per replication) and ``rates.txt``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / "rates.csv"
    with csv_path.open("w", encoding="utf-8", newline="") as handle:
        handle.write(format_metadata(cfg.metadata()))
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(RATE_HEADER)
        for row in outcome.rows:
            writer.writerow(
                (
                    row.rep,
                    row.n,
                    repr(row.h_mu),
                    repr(row.h_sigma),
                    _value(row.mise_mu),
                    _value(row.mise_sigma),
                    row.status,
                )
            )

    context = RateContext(
        config_hash=cfg.config_hash,
        seed=cfg.seed,
        rows=[
            {"n": str(n), "mean": fmt(m), "cov": fmt(c)}
            for n, m, c in zip(outcome.n_values, outcome.mean_mise, outcome.cov_mise)
        ],
        blocks=[
            summary_block(
                "Fitted slopes",
                {"mean": outcome.slope_mean, "covariance": outcome.slope_cov},
                note="theory: -0.8 for the mean, -0.667 for the covariance",
            )
        ],
        checks=outcome.checks,
    )
    text_path = write_text(out / "rates.txt", render_rate_summary(context), label="rates")
    return [csv_path, text_path]
