"""Phase-transition experiment over a ``p × T`` design.

Every ``(rep, p, T)`` cell simulates a dataset, runs the mean and covariance
bandwidth sweeps and records the four aggregate metrics.  Cells run on a
thread pool and land in a :class:`ThreadSafeResultStore`; outputs are
written from the key-sorted store so the thread budget never shows.
"""
from __future__ import annotations

import csv
import logging
import math
from concurrent.futures import Executor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

from src.data.io import format_metadata
from src.evaluation.aggregate import aggregate_mises
from src.evaluation.report import Target
from src.evaluation.sweep import run_sweeps
from src.exceptions import FdaError
from src.experiment.config import ExperimentConfig
from src.experiment.result_store import ThreadSafeResultStore
from src.experiment.seeds import cell_seed
from src.reporting.aggregator import summarize_metrics
from src.reporting.context import PhaseContext
from src.reporting.models import METRICS, CheckResult, MetricRow, MetricSummary
from src.reporting.plots import plot_metric, plot_phase
from src.reporting.render import render_phase_summary, write_text
from src.simulation.generator import generate_dataset

logger = logging.getLogger(__name__)

__all__ = [
    "PhaseCell",
    "PhaseOutcome",
    "phase_shape_checks",
    "run_phase_cell",
    "run_phase_experiment",
    "write_phase_outputs",
]

CellKey = Tuple[int, int, int]

RESULT_HEADER = ("rep", "p", "T", "metric", "value", "status")


@dataclass(frozen=True, slots=True)
class PhaseCell:
    rep: int
    p: int
    T: int

    @property
    def key(self) -> CellKey:
        return (self.rep, self.p, self.T)


@dataclass(slots=True)
class PhaseOutcome:
    """Rows, summaries and shape checks of one phase experiment."""

    rows: List[MetricRow]
    summaries: List[MetricSummary]
    checks: List[CheckResult] = field(default_factory=list)
    paths: List[Path] = field(default_factory=list)

    @property
    def failed_rows(self) -> int:
        return sum(row.status != "ok" for row in self.rows)


# ---------------------------------------------------------------------------
# Cells
# ---------------------------------------------------------------------------


def run_phase_cell(cfg: ExperimentConfig, cell: PhaseCell) -> List[MetricRow]:
    """Simulate, sweep and aggregate one cell; failures become ``failed`` rows."""
    seed = cell_seed(cfg.seed, *cell.key)
    sim = cfg.simulation(n=cfg.n, p=cell.p, t=cell.T, seed=seed)
    logger.debug("phase_cell_started", extra={"cell": cell.key, "seed": seed})
    try:
        data, truth = generate_dataset(sim)
        report = run_sweeps(
            data,
            truth,
            cfg.bandwidths(Target.MEAN),
            cfg.bandwidths(Target.COV),
            cfg.grid(),
            cfg.sweep_settings(),
            centering=cfg.centering,
        )
        metrics: Dict[str, Optional[float]] = aggregate_mises(report).as_dict()
    except FdaError as exc:
        logger.warning("Phase cell rep=%d p=%d T=%d failed: %s", cell.rep, cell.p, cell.T, exc)
        return [MetricRow(cell.rep, cell.p, cell.T, m, math.nan, "failed") for m in METRICS]
    logger.debug("phase_cell_finished", extra={"cell": cell.key})
    return [
        MetricRow(
            cell.rep, cell.p, cell.T, metric, float(metrics[metric]), "ok"  # type: ignore[arg-type]
        )
        for metric in METRICS
    ]


def _cells(cfg: ExperimentConfig) -> List[PhaseCell]:
    return [
        PhaseCell(rep, p, t)
        for rep in range(cfg.reps)
        for p in sorted(set(cfg.p_values))
        for t in sorted(set(cfg.t_values))
    ]


def run_phase_experiment(
    cfg: ExperimentConfig, *, executor: Optional[Executor] = None
) -> PhaseOutcome:
    """Run every ``(rep, p, T)`` cell and summarise the metrics."""
    cells = _cells(cfg)
    store: ThreadSafeResultStore[CellKey, List[MetricRow]] = ThreadSafeResultStore(
        max_cells=len(cells)
    )
    logger.info(
        "Phase experiment: %d cells (reps=%d, p=%s, T=%s, binned=%s)",
        len(cells),
        cfg.reps,
        list(cfg.p_values),
        list(cfg.t_values),
        cfg.binned,
    )

    def _run(cell: PhaseCell) -> None:
        store.add(cell.key, run_phase_cell(cfg, cell))

    if executor is None:
        for cell in cells:
            _run(cell)
    else:
        futures = [executor.submit(_run, cell) for cell in cells]
        for future in futures:
            future.result()

    rows = [row for _, cell_rows in store.sorted_items() for row in cell_rows]
    summaries = summarize_metrics(rows)
    outcome = PhaseOutcome(rows, summaries, phase_shape_checks(rows, summaries))
    if outcome.failed_rows:
        logger.warning("Phase experiment: %d metric rows failed", outcome.failed_rows)
    return outcome


# ---------------------------------------------------------------------------
# Shape checks
# ---------------------------------------------------------------------------


def _lookup(summaries: Sequence[MetricSummary]) -> Dict[Tuple[int, int, str], float]:
    return {(s.p, s.T, s.metric): s.mean for s in summaries}


def _ratio(numerator: float, denominator: float) -> float:
    if not denominator > 0.0:
        return math.nan
    return numerator / denominator


def _worst(values: Sequence[float]) -> float:
    """Largest value; any missing value makes the check fail."""
    if any(math.isnan(v) for v in values):
        return math.inf
    return max(values)


def _max_not_below_ave(rows: Sequence[MetricRow]) -> CheckResult:
    values = {(r.rep, r.p, r.T, r.metric): r.value for r in rows if r.status == "ok"}
    checked = violations = 0
    for (rep, p, t, metric), value in values.items():
        if not metric.startswith("Max"):
            continue
        ave = values.get((rep, p, t, "Ave" + metric[3:]))
        if ave is None:
            continue
        checked += 1
        if value < ave:
            violations += 1
    return CheckResult(
        "max-not-below-ave",
        float(violations),
        "0 violations",
        violations == 0 and checked > 0,
        f"{violations} of {checked} cells with MaxMISE < AveMISE",
    )


def phase_shape_checks(
    rows: Sequence[MetricRow], summaries: Sequence[MetricSummary]
) -> List[CheckResult]:
    """Qualitative phase-transition shape of the covariance metrics.

    Needs at least three ``T`` values for the decay and plateau checks and
    two ``p`` values for the dimension check; absent ones are skipped.
    """
    means = _lookup(summaries)
    ps = sorted({s.p for s in summaries})
    ts = sorted({s.T for s in summaries})
    checks: List[CheckResult] = [_max_not_below_ave(rows)]
    if len(ts) >= 3:
        first, prev, last = ts[0], ts[-2], ts[-1]
        ratios, gaps = [], []
        for p in ps:
            start = means.get((p, first, "AveMISE_sigma"), math.nan)
            before = means.get((p, prev, "AveMISE_sigma"), math.nan)
            end = means.get((p, last, "AveMISE_sigma"), math.nan)
            ratios.append(_ratio(end, start))
            gaps.append(_ratio(abs(end - before), before))
        worst_ratio = _worst(ratios)
        worst_gap = _worst(gaps)
        checks.append(
            CheckResult(
                "sigma-decay",
                worst_ratio,
                "<= 0.25",
                worst_ratio <= 0.25,
                f"AveMISE_sigma(T={last}) / AveMISE_sigma(T={first}), worst over p",
            )
        )
        checks.append(
            CheckResult(
                "sigma-plateau",
                worst_gap,
                "<= 0.25",
                worst_gap <= 0.25,
                f"|AveMISE_sigma(T={last}) - AveMISE_sigma(T={prev})| relative to T={prev}",
            )
        )
    if len(ps) >= 2 and ts:
        for metric in ("MaxMISE_mu", "MaxMISE_sigma"):
            monotone = 0
            for t in ts:
                column = [means.get((p, t, metric), math.nan) for p in ps]
                if all(b >= a for a, b in zip(column, column[1:])):
                    monotone += 1
            required = max(len(ts) - 1, 1)
            checks.append(
                CheckResult(
                    f"{metric}-grows-with-p",
                    float(monotone),
                    f">= {required} of {len(ts)}",
                    monotone >= required,
                    f"T columns where {metric} is nondecreasing in p",
                )
            )
    return checks


# ---------------------------------------------------------------------------
# Output
# ---------------------------------------------------------------------------


def _value(value: float) -> str:
    return repr(value) if math.isfinite(value) else ""


def write_results_csv(rows: Sequence[MetricRow], path: Path, metadata: Dict[str, object]) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as handle:
        handle.write(format_metadata(metadata))
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(RESULT_HEADER)
        for row in rows:
            writer.writerow((row.rep, row.p, row.T, row.metric, _value(row.value), row.status))
    return path


def write_phase_outputs(
    cfg: ExperimentConfig, outcome: PhaseOutcome, out_dir: str | Path
) -> List[Path]:
    """Write ``results.csv``, ``summary.txt``, one SVG per metric and ``phase.svg``."""
    out = Path(out_dir)
    metadata = cfg.metadata()
    identifier = format_metadata(metadata)[2:].strip()
    paths = [write_results_csv(outcome.rows, out / "results.csv", metadata)]
    context = PhaseContext.build(
        config_hash=cfg.config_hash,
        seed=cfg.seed,
        n=cfg.n,
        reps=cfg.reps,
        binned=cfg.binned,
        summaries=outcome.summaries,
        checks=outcome.checks,
        failed_cells=outcome.failed_rows,
    )
    paths.append(write_text(out / "summary.txt", render_phase_summary(context), label="summary"))
    for metric in METRICS:
        path = out / f"{metric}.svg"
        paths.append(plot_metric(outcome.summaries, metric, path, identifier=identifier))
    paths.append(plot_phase(outcome.summaries, out / "phase.svg", identifier=identifier))
    outcome.paths = paths
    logger.info("phase_outputs_written", extra={"out_dir": str(out), "files": len(paths)})
    return paths
