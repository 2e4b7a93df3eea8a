"""Linear binning of observations onto ``R`` equispaced nodes of ``[0, 1]``.

An observation at ``u`` lying between nodes ``r`` and ``r + 1`` sends
``1 - delta`` of its mass to node ``r`` and ``delta`` to node ``r + 1`` with
``delta = u (R - 1) - r``, which preserves the zeroth and first moments.

Pairs ``(U_ijt, U_iks)`` are never binned directly.  Each subject keeps its
1-D binned vectors for ``j`` and ``k`` and the 2-D sums are outer products of
those; for ``j == k`` the same-point products ``t == s`` are subtracted
exactly with per-observation bin weights.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from src.data.dataset import FunctionalDataset
from src.smoothing.models import MeanLike, as_mean_function

logger = logging.getLogger(__name__)

__all__ = [
    "BinnedMarginal",
    "BinnedPairs",
    "PairBinner",
    "bin_centers",
    "bin_marginal",
    "bin_pairs",
    "locate",
]

# Positions within this distance of a node are treated as lying on it.
NODE_SNAP = 1e-9


def bin_centers(bin_count: int) -> np.ndarray:
    """Return the ``R`` equispaced nodes ``r / (R - 1)``."""
    if bin_count < 2:
        raise ValueError(f"bin count must be at least 2, got {bin_count}")
    centers = np.linspace(0.0, 1.0, bin_count)
    centers.setflags(write=False)
    return centers


def locate(times: np.ndarray, bin_count: int) -> tuple[np.ndarray, np.ndarray]:
    """Return the left node index and the fractional offset ``delta`` of each time."""
    pos = np.asarray(times, dtype=np.float64) * (bin_count - 1)
    nearest = np.rint(pos)
    pos = np.where(np.abs(pos - nearest) <= NODE_SNAP, nearest, pos)
    left = np.clip(np.floor(pos), 0, bin_count - 2).astype(np.int64)
    return left, pos - left


def _spread(
    rows: np.ndarray,
    left: np.ndarray,
    delta: np.ndarray,
    mass: np.ndarray,
    shape: Tuple[int, int],
) -> np.ndarray:
    """Accumulate ``mass`` linearly onto the nodes of each row."""
    n_rows, bin_count = shape
    flat = rows * bin_count + left
    size = n_rows * bin_count
    out = np.bincount(flat, weights=mass * (1.0 - delta), minlength=size)
    out += np.bincount(flat + 1, weights=mass * delta, minlength=size)
    return out.reshape(shape)


@dataclass(frozen=True, slots=True)
class _BinnedVariable:
    """Per-observation binning of one variable, flattened over subjects."""

    subjects: np.ndarray
    left: np.ndarray
    delta: np.ndarray
    responses: np.ndarray

    @classmethod
    def build(
        cls,
        data: FunctionalDataset,
        j: int,
        bin_count: int,
        mean: Optional[MeanLike],
    ) -> "_BinnedVariable":
        observed = [data.observations(i, j) for i in range(data.n_subjects)]
        sizes = [u.size for u, _ in observed]
        u_all = np.concatenate([u for u, _ in observed])
        y_all = np.concatenate([y for _, y in observed])
        if mean is not None:
            y_all = y_all - np.asarray(as_mean_function(mean)(u_all), dtype=np.float64)
        left, delta = locate(u_all, bin_count)
        subjects = np.repeat(np.arange(data.n_subjects, dtype=np.int64), sizes)
        return cls(subjects, left, delta, y_all)

    def weights(self, shape: Tuple[int, int]) -> np.ndarray:
        return _spread(self.subjects, self.left, self.delta, np.ones_like(self.delta), shape)

    def sums(self, shape: Tuple[int, int]) -> np.ndarray:
        return _spread(self.subjects, self.left, self.delta, self.responses, shape)


@dataclass(frozen=True, slots=True)
class BinnedMarginal:
    """Binned weights ``c[i, r]`` and response sums ``s[i, r]`` of one variable."""

    var: int
    bin_count: int
    centers: np.ndarray
    counts: np.ndarray
    sums: np.ndarray
    observation_counts: np.ndarray
    centered: bool = False

    @property
    def n_subjects(self) -> int:
        return int(self.counts.shape[0])

    def pooled(self, weights: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Return ``sum_i v_i c[i]`` and ``sum_i v_i s[i]``."""
        weights = np.asarray(weights, dtype=np.float64)
        return weights @ self.counts, weights @ self.sums


def bin_marginal(
    data: FunctionalDataset,
    j: int,
    bin_count: int,
    mean: Optional[MeanLike] = None,
) -> BinnedMarginal:
    """Bin variable *j*; with *mean* the sums hold residuals ``Y - mean(U)``."""
    centers = bin_centers(bin_count)
    var = _BinnedVariable.build(data, j, bin_count, mean)
    shape = (data.n_subjects, bin_count)
    binned = BinnedMarginal(
        var=j,
        bin_count=bin_count,
        centers=centers,
        counts=var.weights(shape),
        sums=var.sums(shape),
        observation_counts=data.counts()[:, j].copy(),
        centered=mean is not None,
    )
    logger.debug(
        "Binned variable %d: %d observations onto %d nodes",
        j,
        var.left.size,
        bin_count,
    )
    return binned


@dataclass(frozen=True, slots=True)
class BinnedPairs:
    """Outer-product representation of the raw covariances of ``(j, k)``.

    ``weight_*`` hold the binned weights and ``resid_*`` the binned residuals
    per subject.  For ``j == k`` the per-observation binning in ``diagonal``
    is used to remove the ``t == s`` products.
    """

    j: int
    k: int
    bin_count: int
    centers: np.ndarray
    weight_j: np.ndarray
    resid_j: np.ndarray
    weight_k: np.ndarray
    resid_k: np.ndarray
    pair_counts: np.ndarray
    diagonal: Optional[_BinnedVariable] = None

    @property
    def n_subjects(self) -> int:
        return int(self.weight_j.shape[0])

    @property
    def marginal(self) -> bool:
        return self.j == self.k

    def diagonal_mass(self, i: int) -> float:
        """Mass of the same-point products removed for subject *i*."""
        if self.diagonal is None:
            return 0.0
        mine = self.diagonal.subjects == i
        delta = self.diagonal.delta[mine]
        return float(np.sum(((1.0 - delta) + delta) ** 2))

    def pair_mass(self, i: int) -> float:
        """Reconstructed number of pairs ``T_ij (T_ik - 1{j=k})`` of subject *i*."""
        full = float(self.weight_j[i].sum() * self.weight_k[i].sum())
        return full - self.diagonal_mass(i)

    def _correction(self, weights: np.ndarray, squared: np.ndarray) -> np.ndarray:
        """``sum_t w_i m_t b_t b_t^T`` over all observations, as an ``R × R`` matrix."""
        diag = self.diagonal
        if diag is None:
            return np.zeros((self.bin_count, self.bin_count))
        size = self.bin_count
        mass = weights[diag.subjects] * squared
        lo = (1.0 - diag.delta)
        hi = diag.delta
        at = diag.left * size + diag.left
        out = np.bincount(at, weights=mass * lo * lo, minlength=size * size)
        out += np.bincount(at + size + 1, weights=mass * hi * hi, minlength=size * size)
        cross = mass * lo * hi
        out += np.bincount(at + 1, weights=cross, minlength=size * size)
        out += np.bincount(at + size, weights=cross, minlength=size * size)
        return out.reshape(size, size)

    def grams(self, weights: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Return the bin-space pair mass ``G_c`` and raw-covariance sums ``G_e``.

        ``G_c[r, r']`` is the weighted mass of pairs binned to nodes
        ``(r, r')`` and ``G_e`` the matching sum of raw covariances.
        """
        weights = np.asarray(weights, dtype=np.float64)
        gram_c = (self.weight_j * weights[:, None]).T @ self.weight_k
        gram_e = (self.resid_j * weights[:, None]).T @ self.resid_k
        if self.diagonal is not None:
            ones = np.ones_like(self.diagonal.delta)
            gram_c = gram_c - self._correction(weights, ones)
            gram_e = gram_e - self._correction(weights, self.diagonal.responses**2)
        return gram_c, gram_e


@dataclass(frozen=True, slots=True)
class _BinnedResiduals:
    variable: _BinnedVariable
    weights: np.ndarray
    sums: np.ndarray

    @classmethod
    def build(
        cls, data: FunctionalDataset, j: int, bin_count: int, mean: MeanLike
    ) -> "_BinnedResiduals":
        variable = _BinnedVariable.build(data, j, bin_count, mean)
        shape = (data.n_subjects, bin_count)
        return cls(variable, variable.weights(shape), variable.sums(shape))


def _assemble_pairs(
    j: int,
    k: int,
    bin_count: int,
    counts: np.ndarray,
    res_j: _BinnedResiduals,
    res_k: _BinnedResiduals,
) -> BinnedPairs:
    pairs = counts[:, j] * (counts[:, k] - (1 if j == k else 0))
    return BinnedPairs(
        j=j,
        k=k,
        bin_count=bin_count,
        centers=bin_centers(bin_count),
        weight_j=res_j.weights,
        resid_j=res_j.sums,
        weight_k=res_k.weights,
        resid_k=res_k.sums,
        pair_counts=np.clip(pairs, 0, None),
        diagonal=res_j.variable if j == k else None,
    )


def bin_pairs(
    data: FunctionalDataset,
    j: int,
    k: int,
    bin_count: int,
    means: Tuple[MeanLike, MeanLike],
) -> BinnedPairs:
    """Bin the centred observations of ``j`` and ``k`` for covariance smoothing."""
    res_j = _BinnedResiduals.build(data, j, bin_count, means[0])
    res_k = res_j if j == k else _BinnedResiduals.build(data, k, bin_count, means[1])
    return _assemble_pairs(j, k, bin_count, data.counts(), res_j, res_k)


class PairBinner:
    """Bins every centred variable once and hands out :class:`BinnedPairs`."""

    def __init__(
        self, data: FunctionalDataset, bin_count: int, means: Sequence[MeanLike]
    ):
        if len(means) != data.n_vars:
            raise ValueError(f"expected {data.n_vars} centering curves, got {len(means)}")
        self.bin_count = bin_count
        self._counts = data.counts()
        self._residuals = [
            _BinnedResiduals.build(data, j, bin_count, means[j]) for j in range(data.n_vars)
        ]
        logger.debug("Binned %d centred variables onto %d nodes", data.n_vars, bin_count)

    def pairs(self, j: int, k: int) -> BinnedPairs:
        return _assemble_pairs(
            j, k, self.bin_count, self._counts, self._residuals[j], self._residuals[k]
        )
