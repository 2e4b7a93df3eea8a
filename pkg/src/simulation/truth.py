"""Analytic ground truth of the simulated process.

Every variable shares the mean

    mu(u) = 1.5 sin(3 pi (u + 0.5)) + 2 u^3

and the cross-covariance of variables ``j`` and ``k`` is

    Sigma_jk(u, v) = rho^|j - k| sum_m d_m phi_m(u) phi_m(v)

over the Fourier basis ``phi = sqrt(2) (cos 2 pi u, sin 2 pi u, cos 4 pi u,
sin 4 pi u)`` with component variances ``d = (1/4, 1/9, 1/16, 1/25)``.
"""
from __future__ import annotations

import csv
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence, Tuple

import numpy as np
from numpy.typing import ArrayLike

from src.data.io import format_metadata

logger = logging.getLogger(__name__)

__all__ = [
    "COMPONENT_VARIANCES",
    "GroundTruth",
    "fourier_basis",
    "true_cov",
    "true_mean",
    "write_truth_csv",
]

COMPONENT_VARIANCES = np.array([1.0 / 4.0, 1.0 / 9.0, 1.0 / 16.0, 1.0 / 25.0])
COMPONENT_VARIANCES.setflags(write=False)


def true_mean(u: ArrayLike) -> np.ndarray:
    u = np.asarray(u, dtype=np.float64)
    return 1.5 * np.sin(3.0 * np.pi * (u + 0.5)) + 2.0 * u**3


def fourier_basis(u: ArrayLike) -> np.ndarray:
    """Return ``phi(u)`` with the four components on the last axis."""
    u = np.asarray(u, dtype=np.float64)
    root2 = np.sqrt(2.0)
    return np.stack(
        [
            root2 * np.cos(2.0 * np.pi * u),
            root2 * np.sin(2.0 * np.pi * u),
            root2 * np.cos(4.0 * np.pi * u),
            root2 * np.sin(4.0 * np.pi * u),
        ],
        axis=-1,
    )


def true_cov(j: int, k: int, u: ArrayLike, v: ArrayLike, rho: float) -> np.ndarray:
    """``Sigma_jk(u, v)``; broadcasts over *u* and *v*."""
    phi_u = fourier_basis(u)
    phi_v = fourier_basis(v)
    return rho ** abs(j - k) * np.sum(COMPONENT_VARIANCES * phi_u * phi_v, axis=-1)


@dataclass(frozen=True, slots=True)
class GroundTruth:
    """Evaluators of the true mean and covariance for a given ``rho``."""

    rho: float
    n_vars: int

    @property
    def variances(self) -> np.ndarray:
        return COMPONENT_VARIANCES

    def mean(self, u: ArrayLike) -> np.ndarray:
        return true_mean(u)

    def basis(self, u: ArrayLike) -> np.ndarray:
        return fourier_basis(u)

    def cov(self, j: int, k: int, u: ArrayLike, v: ArrayLike) -> np.ndarray:
        return true_cov(j, k, u, v, self.rho)

    def mean_curve(self, grid: ArrayLike) -> np.ndarray:
        return true_mean(grid)

    def cov_surface(self, j: int, k: int, grid_u: ArrayLike, grid_v: ArrayLike) -> np.ndarray:
        """Return ``Sigma_jk`` on ``grid_u × grid_v``."""
        uu, vv = np.meshgrid(
            np.asarray(grid_u, dtype=np.float64),
            np.asarray(grid_v, dtype=np.float64),
            indexing="ij",
        )
        return self.cov(j, k, uu, vv)

    def latent(self, scores: ArrayLike, u: ArrayLike) -> np.ndarray:
        """Return ``X(u) = mu(u) + phi(u)^T theta`` for one score vector ``theta``."""
        return true_mean(u) + fourier_basis(u) @ np.asarray(scores, dtype=np.float64)


def write_truth_csv(
    truth: GroundTruth,
    grid: Sequence[float] | np.ndarray,
    path: str | Path,
    *,
    pairs: Optional[Iterable[Tuple[int, int]]] = None,
    metadata: Optional[Mapping[str, object]] = None,
) -> int:
    """Export the true mean and covariance surfaces on *grid* as a tidy CSV.

    Columns are ``kind,j,k,u,v,value``; mean rows leave ``j``, ``k`` and ``v``
    blank.  Returns the number of data rows.
    """
    grid_arr = np.asarray(grid, dtype=np.float64)
    if pairs is None:
        pairs = [(j, k) for j in range(truth.n_vars) for k in range(j, truth.n_vars)]
    path = Path(path)
    rows = 0
    with path.open("w", encoding="utf-8", newline="") as handle:
        handle.write(format_metadata(metadata))
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["kind", "j", "k", "u", "v", "value"])
        for u, value in zip(grid_arr.tolist(), truth.mean_curve(grid_arr).tolist()):
            writer.writerow(["mean", "", "", repr(u), "", repr(value)])
            rows += 1
        for j, k in pairs:
            surface = truth.cov_surface(j, k, grid_arr, grid_arr)
            for r, u in enumerate(grid_arr.tolist()):
                for c, v in enumerate(grid_arr.tolist()):
                    writer.writerow(["cov", j, k, repr(u), repr(v), repr(float(surface[r, c]))])
                    rows += 1
    logger.info("Wrote ground truth", extra={"path": str(path), "rows": rows})
    return rows
