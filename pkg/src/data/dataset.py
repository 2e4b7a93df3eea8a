"""Container for discretely and irregularly observed multivariate functional data.

A :class:`FunctionalDataset` stores, for every subject ``i`` and functional
variable ``j``, the observation times ``U_ijt`` on ``[0, 1]`` and the noisy
values ``Y_ijt``.  Lists may be ragged (``T_ij`` differs across ``i`` and
``j``) and may be empty.

Within each ``(i, j)`` list the observations are sorted by time (ties broken
by value) when the dataset is built, so the order in which callers supply
them never reaches the estimators.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np

__all__ = ["FunctionalDataset"]

ObservationList = Sequence[Tuple[float, float]]


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


def _canonical(times: np.ndarray, values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Return read-only copies of *times*/*values* sorted by (time, value)."""
    times = np.asarray(times, dtype=np.float64).ravel()
    values = np.asarray(values, dtype=np.float64).ravel()
    if times.shape != values.shape:
        raise ValueError("times and values must have the same length")
    if times.size and (not np.all(np.isfinite(times)) or not np.all(np.isfinite(values))):
        raise ValueError("observations must be finite")
    if times.size and (times.min() < 0.0 or times.max() > 1.0):
        raise ValueError("observation times must lie in [0, 1]")
    order = np.lexsort((values, times))
    return _freeze(times[order].copy()), _freeze(values[order].copy())


@dataclass(frozen=True, slots=True)
class FunctionalDataset:
    """Observations ``(U_ijt, Y_ijt)`` for ``n_subjects`` × ``n_vars`` lists."""

    n_subjects: int
    n_vars: int
    times: Tuple[Tuple[np.ndarray, ...], ...]
    values: Tuple[Tuple[np.ndarray, ...], ...]

    def __post_init__(self) -> None:
        if self.n_subjects < 1:
            raise ValueError("n_subjects must be a positive integer")
        if self.n_vars < 1:
            raise ValueError("n_vars must be a positive integer")
        if len(self.times) != self.n_subjects or len(self.values) != self.n_subjects:
            raise ValueError("times/values must have one entry per subject")

        times_rows = []
        values_rows = []
        for i in range(self.n_subjects):
            if len(self.times[i]) != self.n_vars or len(self.values[i]) != self.n_vars:
                raise ValueError(f"subject {i} must have one list per variable")
            pairs = [
                _canonical(self.times[i][j], self.values[i][j])
                for j in range(self.n_vars)
            ]
            times_rows.append(tuple(t for t, _ in pairs))
            values_rows.append(tuple(y for _, y in pairs))
        object.__setattr__(self, "times", tuple(times_rows))
        object.__setattr__(self, "values", tuple(values_rows))

    # ------------------------------------------------------------------
    # Constructors
    # ------------------------------------------------------------------
    @classmethod
    def from_observations(
        cls, obs: Sequence[Sequence[ObservationList]]
    ) -> "FunctionalDataset":
        """Build from nested ``obs[i][j] = [(u, y), ...]`` lists."""
        if not obs:
            raise ValueError("at least one subject is required")
        n_vars = len(obs[0])
        times = []
        values = []
        for subject in obs:
            times.append(
                tuple(np.array([u for u, _ in pairs], dtype=np.float64) for pairs in subject)
            )
            values.append(
                tuple(np.array([y for _, y in pairs], dtype=np.float64) for pairs in subject)
            )
        return cls(len(obs), n_vars, tuple(times), tuple(values))

    @classmethod
    def from_arrays(cls, times: np.ndarray, values: np.ndarray) -> "FunctionalDataset":
        """Build from rectangular ``n × p × T`` arrays (constant ``T_ij``)."""
        times = np.asarray(times, dtype=np.float64)
        values = np.asarray(values, dtype=np.float64)
        if times.ndim != 3 or times.shape != values.shape:
            raise ValueError("times and values must be n x p x T arrays of equal shape")
        n, p, _ = times.shape
        return cls(
            n,
            p,
            tuple(tuple(times[i, j] for j in range(p)) for i in range(n)),
            tuple(tuple(values[i, j] for j in range(p)) for i in range(n)),
        )

    # ------------------------------------------------------------------
    # Accessors
    # ------------------------------------------------------------------
    def observations(self, i: int, j: int) -> tuple[np.ndarray, np.ndarray]:
        """Return the sorted ``(times, values)`` arrays of subject *i*, variable *j*."""
        return self.times[i][j], self.values[i][j]

    def counts(self) -> np.ndarray:
        """Return the ``n × p`` integer matrix of ``T_ij``."""
        return np.array(
            [[t.size for t in row] for row in self.times], dtype=np.int64
        ).reshape(self.n_subjects, self.n_vars)

    @property
    def total_observations(self) -> int:
        return int(self.counts().sum())

    def permuted(self, subject_order: Sequence[int]) -> "FunctionalDataset":
        """Return a copy whose subject ``m`` is this dataset's ``subject_order[m]``."""
        order = list(subject_order)
        if sorted(order) != list(range(self.n_subjects)):
            raise ValueError("subject_order must be a permutation of range(n_subjects)")
        return FunctionalDataset(
            self.n_subjects,
            self.n_vars,
            tuple(self.times[i] for i in order),
            tuple(self.values[i] for i in order),
        )
