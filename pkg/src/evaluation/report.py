"""Tables of MISE values over bandwidth grids."""
from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, replace
from enum import Enum
from pathlib import Path
from typing import Mapping, Optional

import numpy as np

from src.data.io import format_metadata
from src.evaluation.mise import Quadrature

logger = logging.getLogger(__name__)

__all__ = ["CellStatus", "MiseReport", "Target", "write_mise_report"]


class Target(str, Enum):
    MEAN = "mean"
    COV = "cov"


class CellStatus(str, Enum):
    OK = "ok"
    # Some grid point or cell of the estimate was singular.
    FAILED = "failed"
    # Bandwidth below the binned minimum for the bin count.
    TOO_SMALL = "too-small"


def _empty(shape: tuple[int, ...]) -> np.ndarray:
    return np.full(shape, np.nan)


@dataclass(frozen=True, slots=True)
class MiseReport:
    """MISE of every mean curve and covariance surface for each bandwidth.

    ``mise_mean[j, h]`` and ``mise_cov[j, k, h]`` are ``nan`` where the
    estimate failed; ``status_*`` says why.  A report produced by a single
    sweep leaves the other table with zero bandwidths.
    """

    n_vars: int
    bandwidths_mean: np.ndarray
    mise_mean: np.ndarray
    status_mean: np.ndarray
    bandwidths_cov: np.ndarray
    mise_cov: np.ndarray
    status_cov: np.ndarray
    grid: Optional[np.ndarray] = None
    quadrature: Quadrature = Quadrature.TRAPEZOID
    binned: bool = False

    def __post_init__(self) -> None:
        p = self.n_vars
        if self.mise_mean.shape != (p, self.bandwidths_mean.size):
            raise ValueError("mise_mean must be n_vars x len(bandwidths_mean)")
        if self.mise_cov.shape != (p, p, self.bandwidths_cov.size):
            raise ValueError("mise_cov must be n_vars x n_vars x len(bandwidths_cov)")
        if self.status_mean.shape != self.mise_mean.shape:
            raise ValueError("status_mean must match mise_mean")
        if self.status_cov.shape != self.mise_cov.shape:
            raise ValueError("status_cov must match mise_cov")
        valid = np.concatenate([self.mise_mean.ravel(), self.mise_cov.ravel()])
        valid = valid[~np.isnan(valid)]
        if np.any(valid < 0) or not np.all(np.isfinite(valid)):
            raise ValueError("MISE entries must be finite and nonnegative")

    # ------------------------------------------------------------------
    # Constructors
    # ------------------------------------------------------------------
    @classmethod
    def empty(
        cls,
        n_vars: int,
        *,
        bandwidths_mean: Optional[np.ndarray] = None,
        bandwidths_cov: Optional[np.ndarray] = None,
        grid: Optional[np.ndarray] = None,
        binned: bool = False,
    ) -> "MiseReport":
        h_mean = np.asarray([] if bandwidths_mean is None else bandwidths_mean, dtype=np.float64)
        h_cov = np.asarray([] if bandwidths_cov is None else bandwidths_cov, dtype=np.float64)
        return cls(
            n_vars=n_vars,
            bandwidths_mean=h_mean,
            mise_mean=_empty((n_vars, h_mean.size)),
            status_mean=np.full((n_vars, h_mean.size), CellStatus.FAILED.value, dtype=object),
            bandwidths_cov=h_cov,
            mise_cov=_empty((n_vars, n_vars, h_cov.size)),
            status_cov=np.full((n_vars, n_vars, h_cov.size), CellStatus.FAILED.value, dtype=object),
            grid=grid,
            binned=binned,
        )

    @classmethod
    def from_tables(
        cls,
        mise_mean: Optional[np.ndarray] = None,
        bandwidths_mean: Optional[np.ndarray] = None,
        mise_cov: Optional[np.ndarray] = None,
        bandwidths_cov: Optional[np.ndarray] = None,
    ) -> "MiseReport":
        """Build a report from raw tables; ``nan`` entries are marked failed."""
        if mise_mean is None and mise_cov is None:
            raise ValueError("at least one MISE table is required")
        mean = None if mise_mean is None else np.asarray(mise_mean, dtype=np.float64)
        cov = None if mise_cov is None else np.asarray(mise_cov, dtype=np.float64)
        n_vars = mean.shape[0] if mean is not None else cov.shape[0]  # type: ignore[union-attr]
        if mean is None:
            mean = _empty((n_vars, 0))
        if cov is None:
            cov = _empty((n_vars, n_vars, 0))
        h_mean = (
            np.arange(1, mean.shape[1] + 1, dtype=np.float64) / max(mean.shape[1], 1)
            if bandwidths_mean is None
            else np.asarray(bandwidths_mean, dtype=np.float64)
        )
        h_cov = (
            np.arange(1, cov.shape[2] + 1, dtype=np.float64) / max(cov.shape[2], 1)
            if bandwidths_cov is None
            else np.asarray(bandwidths_cov, dtype=np.float64)
        )

        def _status(table: np.ndarray) -> np.ndarray:
            return np.where(
                np.isnan(table), CellStatus.FAILED.value, CellStatus.OK.value
            ).astype(object)

        return cls(
            n_vars=n_vars,
            bandwidths_mean=h_mean,
            mise_mean=mean,
            status_mean=_status(mean),
            bandwidths_cov=h_cov,
            mise_cov=cov,
            status_cov=_status(cov),
        )

    # ------------------------------------------------------------------
    # Queries
    # ------------------------------------------------------------------
    @property
    def has_mean(self) -> bool:
        return self.bandwidths_mean.size > 0

    @property
    def has_cov(self) -> bool:
        return self.bandwidths_cov.size > 0

    @property
    def failed_count(self) -> int:
        """Failed mean cells plus failed covariance cells with ``j <= k``."""
        upper = np.triu(np.ones((self.n_vars, self.n_vars), dtype=bool))
        failed_cov = np.isnan(self.mise_cov) & upper[:, :, None]
        return int(np.isnan(self.mise_mean).sum() + failed_cov.sum())

    @staticmethod
    def _best(table: np.ndarray, bandwidths: np.ndarray) -> np.ndarray:
        if bandwidths.size == 0:
            return np.full(table.shape[:-1], np.nan)
        valid = ~np.isnan(table)
        index = np.argmin(np.where(valid, table, np.inf), axis=-1)
        return np.where(valid.any(axis=-1), bandwidths[index], np.nan)

    def best_mean_bandwidths(self) -> np.ndarray:
        """Per-variable minimiser of the mean MISE (``nan`` if every cell failed)."""
        return self._best(self.mise_mean, self.bandwidths_mean)

    def best_cov_bandwidths(self) -> np.ndarray:
        """Per-pair minimiser of the covariance MISE."""
        return self._best(self.mise_cov, self.bandwidths_cov)

    def merged(self, other: "MiseReport") -> "MiseReport":
        """Mean tables of ``self`` combined with the covariance tables of *other*."""
        if other.n_vars != self.n_vars:
            raise ValueError("reports describe different numbers of variables")
        return replace(
            self,
            bandwidths_cov=other.bandwidths_cov,
            mise_cov=other.mise_cov,
            status_cov=other.status_cov,
        )


def _value(mise: float) -> str:
    return "" if np.isnan(mise) else repr(float(mise))


def write_mise_report(
    report: MiseReport,
    path: str | Path,
    *,
    metadata: Optional[Mapping[str, object]] = None,
) -> int:
    """Write ``j,k,h,mise,status`` rows; covariance rows cover ``j <= k``."""
    path = Path(path)
    rows = 0
    with path.open("w", encoding="utf-8", newline="") as handle:
        handle.write(format_metadata(metadata))
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["j", "k", "h", "mise", "status"])
        for j in range(report.n_vars):
            for c, h in enumerate(report.bandwidths_mean.tolist()):
                writer.writerow(
                    [j, "", repr(h), _value(report.mise_mean[j, c]), report.status_mean[j, c]]
                )
                rows += 1
        for j in range(report.n_vars):
            for k in range(j, report.n_vars):
                for c, h in enumerate(report.bandwidths_cov.tolist()):
                    writer.writerow(
                        [
                            j,
                            k,
                            repr(h),
                            _value(report.mise_cov[j, k, c]),
                            report.status_cov[j, k, c],
                        ]
                    )
                    rows += 1
    logger.debug("Wrote %d MISE rows to %s", rows, path)
    return rows
