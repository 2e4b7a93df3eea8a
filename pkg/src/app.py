"""Subcommand implementations behind the ``fda`` command line.

Each ``cmd_*`` function takes a resolved :class:`ExperimentConfig` plus the
arguments specific to its subcommand, writes its files and returns their
paths.  Process bootstrap (logging, worker pool) lives here as well so
:mod:`src.main` stays a thin argument parser.
"""
from __future__ import annotations

import csv
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from src import config
from src.data.dataset import FunctionalDataset
from src.data.io import format_metadata, read_long_csv, write_long_csv
from src.data.weights import pair_counts
from src.evaluation.aggregate import aggregate_mises, global_opt_bruteforce
from src.evaluation.rates import optimal_bandwidth, rate_diagnostics
from src.evaluation.report import MiseReport, Target, write_mise_report
from src.evaluation.sweep import run_sweeps
from src.exceptions import FdaError, IncompleteEstimateError, TooLargeError
from src.experiment.config import ExperimentConfig
from src.experiment.phase import run_phase_experiment, write_phase_outputs
from src.experiment.rate_study import run_rate_experiment, write_rate_outputs
from src.experiment.verify import run_checks
from src.reporting.context import (
    FailuresContext,
    SweepContext,
    VerifyContext,
    summary_block,
)
from src.reporting.models import CheckResult, FileFailures
from src.reporting.render import (
    render_failures,
    render_sweep_summary,
    render_verify,
    write_text,
)
from src.simulation.generator import generate_dataset
from src.simulation.truth import write_truth_csv
from src.smoothing.binned import estimate_cov_binned, estimate_mean_binned
from src.smoothing.binning import bin_marginal, bin_pairs
from src.smoothing.local_linear import estimate_cov_surface, estimate_mean_curve
from src.smoothing.models import CurveEstimate, SmootherSpec, SurfaceEstimate

logger = logging.getLogger(__name__)

__all__ = [
    "cmd_estimate",
    "cmd_phase_experiment",
    "cmd_rate_experiment",
    "cmd_simulate",
    "cmd_sweep",
    "cmd_verify",
    "configure_logging",
    "default_bandwidth",
    "make_executor",
]

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"


def configure_logging(level: Optional[str] = None) -> None:
    """Send log records to stderr at *level* (``FDA_LOG_LEVEL`` by default)."""
    logging.basicConfig(format=LOG_FORMAT, level=(level or config.LOG_LEVEL).upper())


def make_executor(threads: int) -> ThreadPoolExecutor:
    return ThreadPoolExecutor(max_workers=max(int(threads), 1), thread_name_prefix="fda")


def _out_dir(cfg: ExperimentConfig, out: Optional[str | Path]) -> Path:
    path = Path(out if out is not None else cfg.out_dir)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _cell(value: float) -> str:
    return repr(float(value)) if math.isfinite(value) else ""


# ---------------------------------------------------------------------------
# simulate
# ---------------------------------------------------------------------------


def cmd_simulate(
    cfg: ExperimentConfig, *, out: Optional[str | Path] = None, truth: bool = False
) -> List[Path]:
    """Write ``data.csv`` and ``manifest.txt`` (and ``truth.csv`` on request)."""
    out_dir = _out_dir(cfg, out)
    sim = cfg.simulation()
    data, ground_truth = generate_dataset(sim)
    metadata = cfg.metadata()

    data_path = out_dir / "data.csv"
    rows = write_long_csv(data, data_path, metadata=metadata)
    manifest = out_dir / "manifest.txt"
    write_text(
        manifest,
        format_metadata(metadata) + "\n".join(cfg.canonical_lines()) + "\n",
        label="manifest",
    )
    paths = [data_path, manifest]
    if truth:
        truth_path = out_dir / "truth.csv"
        write_truth_csv(ground_truth, cfg.grid(), truth_path, metadata=metadata)
        paths.append(truth_path)
    logger.info(
        "simulate_finished",
        extra={"path": str(data_path), "rows": rows, "config_hash": cfg.config_hash},
    )
    return paths


# ---------------------------------------------------------------------------
# estimate
# ---------------------------------------------------------------------------


def default_bandwidth(
    data: FunctionalDataset, target: Target, j: int = 0, k: Optional[int] = None
) -> float:
    """Rate-optimal bandwidth for the observed design, capped at 1.

    Means use ``Tbar_mu = mean_i T_ij``; the covariance of ``(j, k)`` (``k``
    defaults to ``j``) uses ``Tbar_sigma = sqrt(mean_i T_ij (T_ik - 1{j=k}))``.
    """
    if Target(target) is Target.MEAN:
        t_bar = float(data.counts()[:, j].mean())
    else:
        t_bar = math.sqrt(float(pair_counts(data, j, j if k is None else k).mean()))
    h = optimal_bandwidth(data.n_subjects, t_bar, max(data.n_vars, 2), target)
    return min(h, 1.0)


def _write_curve(curve: CurveEstimate, path: Path, metadata: Dict[str, object]) -> None:
    with path.open("w", encoding="utf-8", newline="") as handle:
        handle.write(format_metadata(metadata))
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow([repr(u) for u in curve.grid.tolist()])
        writer.writerow([_cell(v) for v in curve.values.tolist()])


def _write_surface(surface: SurfaceEstimate, path: Path, metadata: Dict[str, object]) -> Path:
    with path.open("w", encoding="utf-8", newline="") as handle:
        handle.write(format_metadata(metadata))
        writer = csv.writer(handle, lineterminator="\n")
        for row in surface.values.tolist():
            writer.writerow([_cell(v) for v in row])
    sidecar = path.with_name(path.stem + ".grid.csv")
    with sidecar.open("w", encoding="utf-8", newline="") as handle:
        handle.write(format_metadata(metadata))
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["u", *(repr(u) for u in surface.grid_u.tolist())])
        writer.writerow(["v", *(repr(v) for v in surface.grid_v.tolist())])
    return sidecar


def cmd_estimate(
    cfg: ExperimentConfig,
    dataset: str | Path,
    *,
    out: Optional[str | Path] = None,
    pairs: Optional[Sequence[Tuple[int, int]]] = None,
    h_mean: Optional[float] = None,
    h_cov: Optional[float] = None,
    one_based: bool = False,
) -> List[Path]:
    """Smooth every mean curve and the requested covariance surfaces.

    Writes ``mean_<j>.csv``, ``cov_<j>_<k>.csv`` with ``.grid.csv`` sidecars
    and ``failures.txt``.  If an estimate raises, ``failures.txt`` still lists
    the files written so far and names the error before it propagates.

    Raises
    ------
    IncompleteEstimateError
        After writing, if every evaluation point of every file failed.
    """
    out_dir = _out_dir(cfg, out)
    grid = cfg.grid()
    metadata = cfg.metadata()
    paths: List[Path] = []
    failures: List[FileFailures] = []

    def _write_failures(error: Optional[str] = None) -> Path:
        context = FailuresContext(
            config_hash=cfg.config_hash, seed=cfg.seed, files=failures, error=error
        )
        return write_text(out_dir / "failures.txt", render_failures(context), label="failures")

    try:
        data = read_long_csv(dataset, one_based=one_based)
        p = data.n_vars
        wanted = (
            list(pairs) if pairs is not None else [(j, k) for j in range(p) for k in range(j, p)]
        )
        for j, k in wanted:
            if not (0 <= j < p and 0 <= k < p):
                raise ValueError(f"pair ({j}, {k}) is out of range for {p} variables")

        means: List[CurveEstimate] = []
        for j in range(p):
            spec = SmootherSpec(
                h_mean if h_mean is not None else default_bandwidth(data, Target.MEAN, j),
                cfg.kernel,
                cfg.scheme,
            )
            if cfg.binned:
                binned_mean = bin_marginal(data, j, cfg.bin_count)
                curve = estimate_mean_binned(binned_mean, None, grid, spec)
            else:
                curve = estimate_mean_curve(data, j, grid, spec)
            means.append(curve)
            path = out_dir / f"mean_{j}.csv"
            _write_curve(curve, path, metadata)
            paths.append(path)
            failures.append(FileFailures(path.name, curve.failure_count, curve.grid.size))

        for j, k in wanted:
            spec = SmootherSpec(
                h_cov if h_cov is not None else default_bandwidth(data, Target.COV, j, k),
                cfg.kernel,
                cfg.scheme,
            )
            centering = (means[j], means[k])
            if cfg.binned:
                binned = bin_pairs(data, j, k, cfg.bin_count, centering)
                surface = estimate_cov_binned(binned, None, grid, grid, spec)
            else:
                surface = estimate_cov_surface(data, j, k, grid, grid, spec, centering)
            path = out_dir / f"cov_{j}_{k}.csv"
            paths.extend([path, _write_surface(surface, path, metadata)])
            failures.append(FileFailures(path.name, surface.failure_count, surface.values.size))
    except FdaError as exc:
        _write_failures(f"{type(exc).__name__}: {exc}")
        raise

    paths.append(_write_failures())
    logger.info("estimate_finished", extra={"out_dir": str(out_dir), "files": len(paths)})
    if failures and all(item.all_failed for item in failures):
        raise IncompleteEstimateError("every evaluation point of every estimate failed")
    return paths


# ---------------------------------------------------------------------------
# sweep
# ---------------------------------------------------------------------------


def _identity_block(report: MiseReport, max_mean: Optional[float]) -> Dict[str, object]:
    try:
        brute = global_opt_bruteforce(report, Target.MEAN)
    except TooLargeError as exc:
        logger.info("Skipping brute-force optimum: %s", exc)
        return {"global_opt_mu": None, "MaxMISE_mu": max_mean, "identical": None}
    return {"global_opt_mu": brute, "MaxMISE_mu": max_mean, "identical": brute == max_mean}


def cmd_sweep(
    cfg: ExperimentConfig,
    *,
    out: Optional[str | Path] = None,
    executor: Optional[ThreadPoolExecutor] = None,
) -> List[Path]:
    """Simulate from *cfg*, run both sweeps, write ``mise_report.csv`` and ``summary.txt``."""
    out_dir = _out_dir(cfg, out)
    data, truth = generate_dataset(cfg.simulation())
    report = run_sweeps(
        data,
        truth,
        cfg.bandwidths(Target.MEAN),
        cfg.bandwidths(Target.COV),
        cfg.grid(),
        cfg.sweep_settings(),
        centering=cfg.centering,
        executor=executor,
    )
    metadata = cfg.metadata()
    csv_path = out_dir / "mise_report.csv"
    write_mise_report(report, csv_path, metadata=metadata)

    blocks = []
    note = None
    try:
        aggregates = aggregate_mises(report)
    except IncompleteEstimateError as exc:
        note = f"aggregates unavailable: {exc}"
    else:
        blocks.append(summary_block("Aggregate MISE", dict(aggregates.as_dict())))
        blocks.append(
            summary_block(
                "Global optimum (brute force)",
                _identity_block(report, aggregates.max_mean),
            )
        )
        h_mu = report.best_mean_bandwidths()
        h_sigma = report.best_cov_bandwidths()
        diagnostics = rate_diagnostics(data, h_mu, h_sigma)
        blocks.append(
            summary_block(
                "Rate diagnostics",
                {
                    "n": diagnostics.n,
                    "p": int(diagnostics.p),
                    "threshold": diagnostics.threshold,
                    "mean T": float(diagnostics.t_bar_mean.mean()),
                    "regime": diagnostics.regime.value,
                    "min gamma": float(diagnostics.gamma.min()),
                    "min nu": float(diagnostics.nu.min()),
                    "h_mu (median best)": float(np.median(h_mu)),
                    "h_sigma (median best)": float(np.median(h_sigma)),
                },
            )
        )
    if report.failed_count:
        blocks.append(summary_block("Failures", {"failed cells": report.failed_count}))
    context = SweepContext(
        config_hash=cfg.config_hash, seed=cfg.seed, blocks=blocks, note=note
    )
    text_path = write_text(out_dir / "summary.txt", render_sweep_summary(context), label="summary")
    return [csv_path, text_path]


# ---------------------------------------------------------------------------
# phase-experiment / rate-experiment / verify
# ---------------------------------------------------------------------------


def cmd_phase_experiment(
    cfg: ExperimentConfig,
    *,
    out: Optional[str | Path] = None,
    executor: Optional[ThreadPoolExecutor] = None,
) -> List[Path]:
    """Write ``results.csv``, ``summary.txt`` and the SVG plots."""
    out_dir = _out_dir(cfg, out)
    outcome = run_phase_experiment(cfg, executor=executor)
    return write_phase_outputs(cfg, outcome, out_dir)


def cmd_rate_experiment(
    cfg: ExperimentConfig,
    *,
    out: Optional[str | Path] = None,
    executor: Optional[ThreadPoolExecutor] = None,
) -> List[Path]:
    out_dir = _out_dir(cfg, out)
    outcome = run_rate_experiment(cfg, executor=executor)
    return write_rate_outputs(cfg, outcome, out_dir)


def cmd_verify(*, full: bool = False, threads: int = 1) -> Tuple[bool, str]:
    """Run the acceptance suite; returns ``(all passed, rendered table)``."""
    checks: List[CheckResult] = run_checks(full=full, threads=threads)
    context = VerifyContext(checks, full=full)
    return context.passed == len(checks), render_verify(context)

