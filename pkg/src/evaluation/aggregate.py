"""Average and worst-case MISE over variables, and the brute-force global optimum."""
from __future__ import annotations

import itertools
import logging
from typing import NamedTuple, Optional

import numpy as np

from src import config
from src.evaluation.report import MiseReport, Target
from src.exceptions import IncompleteEstimateError, TooLargeError

logger = logging.getLogger(__name__)

__all__ = ["MiseAggregates", "aggregate_mises", "global_opt_bruteforce"]


class MiseAggregates(NamedTuple):
    ave_mean: Optional[float]
    max_mean: Optional[float]
    ave_cov: Optional[float]
    max_cov: Optional[float]

    def as_dict(self) -> dict[str, Optional[float]]:
        return {
            "AveMISE_mu": self.ave_mean,
            "MaxMISE_mu": self.max_mean,
            "AveMISE_sigma": self.ave_cov,
            "MaxMISE_sigma": self.max_cov,
        }


def _row_minima(table: np.ndarray, label: str) -> np.ndarray:
    """Minimum over the bandwidth axis, ignoring failed cells."""
    valid = ~np.isnan(table)
    if not np.all(valid.any(axis=-1)):
        raise IncompleteEstimateError(f"some {label} row has no successful bandwidth")
    return np.min(np.where(valid, table, np.inf), axis=-1)


def aggregate_mises(report: MiseReport) -> MiseAggregates:
    """Return ``(AveMISE_mu, MaxMISE_mu, AveMISE_sigma, MaxMISE_sigma)``.

    Each variable (or pair) contributes its best bandwidth's MISE.  Tables
    the report does not carry yield ``None``.
    """
    ave_mean = max_mean = ave_cov = max_cov = None
    if report.has_mean:
        minima = _row_minima(report.mise_mean, "mean")
        ave_mean = float(np.mean(minima))
        max_mean = float(np.max(minima))
    if report.has_cov:
        minima = _row_minima(report.mise_cov, "covariance")
        ave_cov = float(np.sum(minima) / report.n_vars**2)
        max_cov = float(np.max(minima))
    return MiseAggregates(ave_mean, max_mean, ave_cov, max_cov)


def _cells(report: MiseReport, which: Target) -> np.ndarray:
    """Rows of the table to assign bandwidths to (``j <= k`` for covariances)."""
    if which is Target.MEAN:
        return report.mise_mean
    upper = np.triu_indices(report.n_vars)
    return report.mise_cov[upper]


def global_opt_bruteforce(
    report: MiseReport,
    which: Target | str = Target.MEAN,
    *,
    limit: int = config.BRUTEFORCE_LIMIT,
) -> float:
    """Minimise the worst MISE over every joint bandwidth assignment.

    Enumerates all ``r^cells`` assignments; failed cells count as ``+inf``.

    Raises
    ------
    TooLargeError
        If the number of assignments exceeds *limit*.
    """
    table = _cells(report, Target(which))
    cells, choices = table.shape
    if choices == 0:
        raise ValueError(f"report carries no {Target(which).value} bandwidths")
    if choices**cells > limit:
        raise TooLargeError(
            f"{choices}^{cells} bandwidth assignments exceed the limit of {limit}"
        )
    scores = np.where(np.isnan(table), np.inf, table).tolist()
    best = float("inf")
    for assignment in itertools.product(range(choices), repeat=cells):
        worst = max(scores[cell][pick] for cell, pick in enumerate(assignment))
        if worst < best:
            best = worst
    logger.debug("Brute-forced %d assignments for %s", choices**cells, Target(which).value)
    return best
