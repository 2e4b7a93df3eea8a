"""Bandwidth grid searches against a known truth.

Every ``(j, h)`` mean cell and every covariance pair ``(j, k)`` with
``j <= k`` is an independent task; an executor, when given, maps over them
and results are written back by index so the report never depends on
scheduling.
"""
from __future__ import annotations

import logging
from concurrent.futures import Executor
from dataclasses import dataclass
from enum import Enum
from typing import Callable, List, Optional, Sequence, Tuple, TypeVar

import numpy as np

from src import config
from src.data.dataset import FunctionalDataset
from src.data.weights import WeightScheme, cov_weights, mean_weights
from src.evaluation.mise import mise_cov, mise_mean
from src.evaluation.report import CellStatus, MiseReport
from src.exceptions import BandwidthTooSmallForGridError, IncompleteEstimateError
from src.simulation.truth import GroundTruth
from src.smoothing.binned import estimate_cov_binned, estimate_mean_binned
from src.smoothing.binning import BinnedMarginal, PairBinner, bin_marginal
from src.smoothing.kernels import Kernel
from src.smoothing.local_linear import estimate_cov_surface, estimate_mean_curve
from src.smoothing.models import CurveEstimate, MeanLike, SmootherSpec

logger = logging.getLogger(__name__)

__all__ = [
    "Centering",
    "SweepSettings",
    "bandwidth_sweep_cov",
    "bandwidth_sweep_mean",
    "centering_means",
    "default_bandwidth_grid",
    "run_sweeps",
]

_T = TypeVar("_T")
_R = TypeVar("_R")


class Centering(str, Enum):
    """Curves subtracted before forming raw covariances in a sweep."""

    ESTIMATED = "estimated"
    TRUE = "true"


@dataclass(frozen=True, slots=True)
class SweepSettings:
    """Estimator choices shared by the mean and covariance sweeps."""

    scheme: WeightScheme = WeightScheme.PER_OBSERVATION
    binned: bool = False
    kernel: Kernel = Kernel.EPANECHNIKOV
    bin_count: int = config.BIN_COUNT

    def __post_init__(self) -> None:
        object.__setattr__(self, "scheme", WeightScheme(self.scheme))
        object.__setattr__(self, "kernel", Kernel(self.kernel))
        if self.bin_count < 2:
            raise ValueError(f"bin_count must be at least 2, got {self.bin_count}")

    def spec(self, bandwidth: float) -> SmootherSpec:
        return SmootherSpec(bandwidth, self.kernel, self.scheme)


def default_bandwidth_grid(
    minimum: float = config.BANDWIDTH_MIN,
    maximum: float = config.BANDWIDTH_MAX,
    count: int = config.BANDWIDTH_COUNT,
) -> np.ndarray:
    """Geometric grid of *count* bandwidths spanning ``[minimum, maximum]``."""
    if count < 1:
        raise ValueError(f"bandwidth count must be positive, got {count}")
    if not 0.0 < minimum <= maximum <= 1.0:
        raise ValueError(
            f"bandwidth range must satisfy 0 < min <= max <= 1, got [{minimum}, {maximum}]"
        )
    return np.geomspace(minimum, maximum, count)


def _bandwidth_set(bandwidths: Sequence[float] | np.ndarray) -> np.ndarray:
    unique = np.unique(np.asarray(bandwidths, dtype=np.float64).ravel())
    if unique.size == 0:
        raise ValueError("bandwidth set must not be empty")
    if unique[0] <= 0.0 or unique[-1] > 1.0:
        raise ValueError("bandwidths must lie in (0, 1]")
    return unique


def _map(
    executor: Optional[Executor], fn: Callable[[_T], _R], items: Sequence[_T]
) -> List[_R]:
    if executor is None:
        return [fn(item) for item in items]
    return list(executor.map(fn, items))


def _score(compute: Callable[[], float]) -> Tuple[float, CellStatus]:
    try:
        return compute(), CellStatus.OK
    except IncompleteEstimateError:
        return float("nan"), CellStatus.FAILED
    except BandwidthTooSmallForGridError:
        return float("nan"), CellStatus.TOO_SMALL


def _log_failures(kind: str, statuses: Sequence[CellStatus]) -> None:
    failed = sum(status is not CellStatus.OK for status in statuses)
    if failed:
        logger.warning("%s sweep: %d/%d cells failed", kind, failed, len(statuses))


# ---------------------------------------------------------------------------
# Mean sweep
# ---------------------------------------------------------------------------


def _mean_estimate(
    data: FunctionalDataset,
    j: int,
    grid: np.ndarray,
    spec: SmootherSpec,
    binned: Optional[BinnedMarginal],
) -> CurveEstimate:
    if binned is None:
        return estimate_mean_curve(data, j, grid, spec)
    return estimate_mean_binned(binned, None, grid, spec)


def bandwidth_sweep_mean(
    data: FunctionalDataset,
    truth: GroundTruth,
    bandwidths: Sequence[float] | np.ndarray,
    grid: Sequence[float] | np.ndarray,
    settings: SweepSettings = SweepSettings(),
    *,
    executor: Optional[Executor] = None,
) -> MiseReport:
    """MISE of every mean curve for every bandwidth (duplicates removed)."""
    h_set = _bandwidth_set(bandwidths)
    grid_arr = np.asarray(grid, dtype=np.float64)
    p = data.n_vars
    for j in range(p):
        mean_weights(data, j, settings.scheme)

    marginals: List[Optional[BinnedMarginal]] = [
        bin_marginal(data, j, settings.bin_count) if settings.binned else None
        for j in range(p)
    ]
    cells = [(j, c) for j in range(p) for c in range(h_set.size)]

    def _cell(cell: Tuple[int, int]) -> Tuple[float, CellStatus]:
        j, c = cell
        spec = settings.spec(float(h_set[c]))
        return _score(
            lambda: mise_mean(
                _mean_estimate(data, j, grid_arr, spec, marginals[j]),
                truth.mean,
            )
        )

    results = _map(executor, _cell, cells)
    report = MiseReport.empty(p, bandwidths_mean=h_set, grid=grid_arr, binned=settings.binned)
    for (j, c), (value, status) in zip(cells, results):
        report.mise_mean[j, c] = value
        report.status_mean[j, c] = status.value
    _log_failures("Mean", [status for _, status in results])
    return report


# ---------------------------------------------------------------------------
# Covariance sweep
# ---------------------------------------------------------------------------


def centering_means(
    data: FunctionalDataset,
    truth: GroundTruth,
    mean_report: Optional[MiseReport],
    grid: Sequence[float] | np.ndarray,
    settings: SweepSettings = SweepSettings(),
    centering: Centering | str = Centering.ESTIMATED,
) -> List[MeanLike]:
    """Curves used to centre raw covariances in a covariance sweep.

    ``estimated`` smooths each variable at its MISE-optimal bandwidth from
    *mean_report*; ``true`` uses the known mean.
    """
    if Centering(centering) is Centering.TRUE:
        return [truth.mean for _ in range(data.n_vars)]
    if mean_report is None or not mean_report.has_mean:
        raise ValueError("estimated centering requires a mean sweep report")
    grid_arr = np.asarray(grid, dtype=np.float64)
    means: List[MeanLike] = []
    for j, h in enumerate(mean_report.best_mean_bandwidths().tolist()):
        if np.isnan(h):
            raise IncompleteEstimateError(f"no mean bandwidth succeeded for variable {j}")
        binned = bin_marginal(data, j, settings.bin_count) if settings.binned else None
        means.append(_mean_estimate(data, j, grid_arr, settings.spec(h), binned))
    return means


def bandwidth_sweep_cov(
    data: FunctionalDataset,
    truth: GroundTruth,
    bandwidths: Sequence[float] | np.ndarray,
    grid: Sequence[float] | np.ndarray,
    means: Sequence[MeanLike],
    settings: SweepSettings = SweepSettings(),
    *,
    executor: Optional[Executor] = None,
) -> MiseReport:
    """MISE of every covariance surface ``j <= k``, mirrored to ``(k, j)``.

    One task per pair: its binned grams and true surface are built once and
    reused for every bandwidth.
    """
    h_set = _bandwidth_set(bandwidths)
    grid_arr = np.asarray(grid, dtype=np.float64)
    p = data.n_vars
    if len(means) != p:
        raise ValueError(f"expected {p} centering curves, got {len(means)}")
    binner = PairBinner(data, settings.bin_count, means) if settings.binned else None

    def _pair(pair: Tuple[int, int]) -> List[Tuple[float, CellStatus]]:
        j, k = pair
        weights = cov_weights(data, j, k, settings.scheme)
        expected = truth.cov_surface(j, k, grid_arr, grid_arr)
        binned = None if binner is None else binner.pairs(j, k)
        grams = None if binned is None else binned.grams(weights)

        def _compute(spec: SmootherSpec) -> float:
            if binned is None:
                surface = estimate_cov_surface(
                    data, j, k, grid_arr, grid_arr, spec, (means[j], means[k])
                )
            else:
                surface = estimate_cov_binned(
                    binned, None, grid_arr, grid_arr, spec, grams=grams
                )
            return mise_cov(surface, expected)

        scores = []
        for h in h_set:
            spec = settings.spec(float(h))
            scores.append(_score(lambda: _compute(spec)))
        return scores

    pairs = [(j, k) for j in range(p) for k in range(j, p)]
    results = _map(executor, _pair, pairs)
    report = MiseReport.empty(p, bandwidths_cov=h_set, grid=grid_arr, binned=settings.binned)
    statuses: List[CellStatus] = []
    for (j, k), scores in zip(pairs, results):
        for c, (value, status) in enumerate(scores):
            for a, b in {(j, k), (k, j)}:
                report.mise_cov[a, b, c] = value
                report.status_cov[a, b, c] = status.value
            statuses.append(status)
    _log_failures("Covariance", statuses)
    return report


def run_sweeps(
    data: FunctionalDataset,
    truth: GroundTruth,
    bandwidths_mean: Sequence[float] | np.ndarray,
    bandwidths_cov: Sequence[float] | np.ndarray,
    grid: Sequence[float] | np.ndarray,
    settings: SweepSettings = SweepSettings(),
    *,
    centering: Centering | str = Centering.ESTIMATED,
    executor: Optional[Executor] = None,
) -> MiseReport:
    """Mean sweep, centering, then covariance sweep, merged into one report."""
    mean_report = bandwidth_sweep_mean(
        data, truth, bandwidths_mean, grid, settings, executor=executor
    )
    means = centering_means(data, truth, mean_report, grid, settings, centering)
    cov_report = bandwidth_sweep_cov(
        data, truth, bandwidths_cov, grid, means, settings, executor=executor
    )
    return mean_report.merged(cov_report)
