"""Subject weights ``v_ij`` (mean) and ``w_ijk`` (covariance).

Both schemes satisfy the normalization contracts

    sum_i T_ij v_ij = 1        sum_i T_ij (T_ik - 1{j=k}) w_ijk = 1

with subjects that contribute nothing receiving weight zero and being left
out of the denominators.
"""
from __future__ import annotations

from enum import Enum
from typing import Sequence, Union

import numpy as np

from src.data.dataset import FunctionalDataset
from src.exceptions import AllEmptyError, NoPairsError

__all__ = [
    "WeightScheme",
    "WeightsLike",
    "mean_weights",
    "cov_weights",
    "pair_counts",
    "scheme_weights",
    "resolve_mean_weights",
    "resolve_cov_weights",
]


class WeightScheme(str, Enum):
    """Allocation of influence across subjects."""

    PER_OBSERVATION = "per-obs"
    PER_SUBJECT = "per-subject"


WeightsLike = Union[WeightScheme, Sequence[float], np.ndarray]


def scheme_weights(units: np.ndarray, scheme: WeightScheme) -> np.ndarray:
    """Weights per subject given each subject's number of contributing *units*."""
    active = units > 0
    weights = np.zeros(units.shape, dtype=np.float64)
    if scheme is WeightScheme.PER_OBSERVATION:
        weights[active] = 1.0 / float(units.sum())
    elif scheme is WeightScheme.PER_SUBJECT:
        weights[active] = 1.0 / (float(np.count_nonzero(active)) * units[active])
    else:  # pragma: no cover – exhaustive enum
        raise ValueError(f"unsupported weight scheme: {scheme!r}")
    return weights


def pair_counts(data: FunctionalDataset, j: int, k: int) -> np.ndarray:
    """Return ``T_ij (T_ik - 1{j=k})`` per subject (never negative)."""
    counts = data.counts()
    pairs = counts[:, j] * (counts[:, k] - (1 if j == k else 0))
    return np.clip(pairs, 0, None)


def mean_weights(data: FunctionalDataset, j: int, scheme: WeightScheme) -> np.ndarray:
    """Per-subject mean weights ``v_ij`` for variable *j*."""
    counts = data.counts()[:, j]
    if counts.sum() == 0:
        raise AllEmptyError(f"variable {j} has no observations")
    return scheme_weights(counts, WeightScheme(scheme))


def cov_weights(
    data: FunctionalDataset, j: int, k: int, scheme: WeightScheme
) -> np.ndarray:
    """Per-subject covariance weights ``w_ijk`` for the pair ``(j, k)``."""
    pairs = pair_counts(data, j, k)
    if pairs.sum() == 0:
        raise NoPairsError(f"no subject contributes a valid pair for ({j}, {k})")
    return scheme_weights(pairs, WeightScheme(scheme))


def _explicit(weights: Sequence[float] | np.ndarray, n_subjects: int) -> np.ndarray:
    arr = np.asarray(weights, dtype=np.float64).ravel()
    if arr.size != n_subjects:
        raise ValueError(f"expected {n_subjects} subject weights, got {arr.size}")
    if np.any(arr < 0) or not np.all(np.isfinite(arr)):
        raise ValueError("subject weights must be finite and nonnegative")
    return arr


def resolve_mean_weights(
    data: FunctionalDataset, j: int, weights: WeightsLike
) -> np.ndarray:
    """Return ``v_ij`` from a scheme or an explicit per-subject vector."""
    if isinstance(weights, (WeightScheme, str)):
        return mean_weights(data, j, WeightScheme(weights))
    if data.counts()[:, j].sum() == 0:
        raise AllEmptyError(f"variable {j} has no observations")
    return _explicit(weights, data.n_subjects)


def resolve_cov_weights(
    data: FunctionalDataset, j: int, k: int, weights: WeightsLike
) -> np.ndarray:
    """Return ``w_ijk`` from a scheme or an explicit per-subject vector."""
    if isinstance(weights, (WeightScheme, str)):
        return cov_weights(data, j, k, WeightScheme(weights))
    if pair_counts(data, j, k).sum() == 0:
        raise NoPairsError(f"no subject contributes a valid pair for ({j}, {k})")
    return _explicit(weights, data.n_subjects)
