"""Exact (unbinned) local linear estimators of mean curves and covariance surfaces.

Mean curves solve the weighted least squares problem

    min_{b0, b1} sum_i v_ij sum_t {Y_ijt - b0 - b1 (U_ijt - u)}^2 K_h(U_ijt - u)

and covariance surfaces fit a local plane to the raw covariances
``Theta_ijkts = {Y_ijt - mu_j(U_ijt)}{Y_iks - mu_k(U_iks)}`` with the product
kernel ``K_h(U_ijt - u) K_h(U_iks - v)``.  For marginal surfaces (``j == k``)
the same-time pairs ``t == s`` are left out so the measurement-error variance
never reaches the estimate.

Observations (or pairs) of all subjects are pooled and sorted once; each
evaluation point then scans only its kernel window found by binary search.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from src.data.dataset import FunctionalDataset
from src.data.weights import WeightsLike, resolve_cov_weights, resolve_mean_weights
from src.exceptions import SingularSystemError
from src.smoothing.linalg import solve_local_linear, solve_local_plane
from src.smoothing.models import (
    CurveEstimate,
    MeanLike,
    SmootherSpec,
    SurfaceEstimate,
    as_mean_function,
    assemble_surface,
)

logger = logging.getLogger(__name__)

__all__ = [
    "PairSet",
    "RawCovariances",
    "as_mean_function",
    "raw_covariances",
    "smooth_pairs",
    "estimate_mean_at",
    "estimate_mean_curve",
    "estimate_mean_curves",
    "estimate_cov_at",
    "estimate_cov_surface",
    "estimate_cov_surfaces",
]

# ---------------------------------------------------------------------------
# Mean curves
# ---------------------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class _PooledObservations:
    """All observations of one variable, sorted by (time, value, weight)."""

    times: np.ndarray
    values: np.ndarray
    weights: np.ndarray

    @classmethod
    def build(
        cls, data: FunctionalDataset, j: int, subject_weights: np.ndarray
    ) -> "_PooledObservations":
        times: List[np.ndarray] = []
        values: List[np.ndarray] = []
        weights: List[np.ndarray] = []
        for i in range(data.n_subjects):
            u, y = data.observations(i, j)
            times.append(u)
            values.append(y)
            weights.append(np.full(u.size, subject_weights[i]))
        t = np.concatenate(times)
        y = np.concatenate(values)
        w = np.concatenate(weights)
        order = np.lexsort((w, y, t))
        return cls(t[order], y[order], w[order])

    def window(self, u: float, h: float) -> slice:
        lo = int(np.searchsorted(self.times, u - h, side="left"))
        hi = int(np.searchsorted(self.times, u + h, side="right"))
        return slice(lo, hi)


def _mean_point(
    pool: _PooledObservations, u: float, spec: SmootherSpec
) -> tuple[float, bool, int]:
    h = spec.bandwidth
    win = pool.window(u, h)
    d = (pool.times[win] - u) / h
    k = spec.kernel(d) / h * pool.weights[win]
    y = pool.values[win]
    kd = k * d
    b0, ok = solve_local_linear(
        np.sum(k), np.sum(kd), np.sum(kd * d), np.sum(k * y), np.sum(kd * y)
    )
    return float(b0), bool(ok), d.size


def estimate_mean_at(
    data: FunctionalDataset,
    j: int,
    u: float,
    spec: SmootherSpec,
    *,
    weights: Optional[WeightsLike] = None,
) -> float:
    """Return the local linear mean estimate of variable *j* at *u*.

    Raises
    ------
    SingularSystemError
        If the kernel window holds too little (or degenerate) data.
    """
    v = resolve_mean_weights(data, j, spec.scheme if weights is None else weights)
    pool = _PooledObservations.build(data, j, v)
    value, ok, _ = _mean_point(pool, float(u), spec)
    if not ok:
        raise SingularSystemError(
            f"mean system for variable {j} is singular at u={u:g} (h={spec.bandwidth:g})"
        )
    return value


def estimate_mean_curve(
    data: FunctionalDataset,
    j: int,
    grid: Sequence[float] | np.ndarray,
    spec: SmootherSpec,
    *,
    weights: Optional[WeightsLike] = None,
) -> CurveEstimate:
    """Evaluate the mean estimate of variable *j* on *grid*, recording failures."""
    grid_arr = np.asarray(grid, dtype=np.float64)
    v = resolve_mean_weights(data, j, spec.scheme if weights is None else weights)
    pool = _PooledObservations.build(data, j, v)

    values = np.full(grid_arr.size, np.nan)
    failures: List[int] = []
    evaluations = 0
    for idx, u in enumerate(grid_arr.tolist()):
        value, ok, count = _mean_point(pool, u, spec)
        evaluations += count
        if ok:
            values[idx] = value
        else:
            failures.append(idx)

    if failures:
        logger.warning(
            "Mean curve for variable %d: %d/%d grid points singular (h=%g)",
            j,
            len(failures),
            grid_arr.size,
            spec.bandwidth,
        )
    return CurveEstimate(
        grid_arr,
        values,
        tuple(failures),
        {"bandwidth": spec.bandwidth, "kernel_evaluations": evaluations, "binned": False},
    )


def estimate_mean_curves(
    data: FunctionalDataset, grid: Sequence[float] | np.ndarray, spec: SmootherSpec
) -> List[CurveEstimate]:
    """Mean curves for every variable."""
    return [estimate_mean_curve(data, j, grid, spec) for j in range(data.n_vars)]


# ---------------------------------------------------------------------------
# Raw covariances
# ---------------------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class RawCovariances:
    """Raw covariance triples ``(U_ijt, U_iks, Theta_ijkts)`` of one subject."""

    u: np.ndarray
    v: np.ndarray
    theta: np.ndarray

    def __len__(self) -> int:
        return int(self.theta.size)

    def triples(self) -> List[Tuple[float, float, float]]:
        return list(zip(self.u.tolist(), self.v.tolist(), self.theta.tolist()))


def raw_covariances(
    data: FunctionalDataset,
    j: int,
    k: int,
    mean_j: MeanLike,
    mean_k: MeanLike,
    i: int,
) -> RawCovariances:
    """Return the raw covariances of subject *i* for the pair ``(j, k)``.

    Pairs are ordered by ``t`` then ``s``; for ``j == k`` the ``t == s``
    pairs are excluded.
    """
    u_j, y_j = data.observations(i, j)
    u_k, y_k = data.observations(i, k)
    res_j = y_j - as_mean_function(mean_j)(u_j)
    res_k = y_k - as_mean_function(mean_k)(u_k)

    uu, vv = np.meshgrid(u_j, u_k, indexing="ij")
    theta = np.multiply.outer(res_j, res_k)
    if j == k:
        keep = ~np.eye(u_j.size, dtype=bool)
        return RawCovariances(uu[keep], vv[keep], theta[keep])
    return RawCovariances(uu.ravel(), vv.ravel(), theta.ravel())


# ---------------------------------------------------------------------------
# Covariance surfaces
# ---------------------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class PairSet:
    """Pooled raw covariance triples with per-pair weights, sorted by (u, v, Theta, w)."""

    u: np.ndarray
    v: np.ndarray
    theta: np.ndarray
    weights: np.ndarray

    @classmethod
    def build(
        cls,
        data: FunctionalDataset,
        j: int,
        k: int,
        means: Tuple[MeanLike, MeanLike],
        subject_weights: np.ndarray,
    ) -> "PairSet":
        mean_j = as_mean_function(means[0])
        mean_k = as_mean_function(means[1])
        parts = [
            raw_covariances(data, j, k, mean_j, mean_k, i) for i in range(data.n_subjects)
        ]
        u = np.concatenate([p.u for p in parts])
        v = np.concatenate([p.v for p in parts])
        theta = np.concatenate([p.theta for p in parts])
        w = np.concatenate(
            [np.full(len(p), subject_weights[i]) for i, p in enumerate(parts)]
        )
        return cls.from_triples(u, v, theta, w)

    @classmethod
    def from_triples(
        cls,
        u: np.ndarray,
        v: np.ndarray,
        theta: np.ndarray,
        weights: np.ndarray,
    ) -> "PairSet":
        """Wrap arbitrary ``(u, v, Theta)`` responses with weights."""
        u, v, theta, weights = (
            np.asarray(a, dtype=np.float64).ravel() for a in (u, v, theta, weights)
        )
        if not u.size == v.size == theta.size == weights.size:
            raise ValueError("u, v, theta and weights must have equal lengths")
        order = np.lexsort((weights, theta, v, u))
        return cls(u[order], v[order], theta[order], weights[order])

    def __len__(self) -> int:
        return int(self.theta.size)

    def row(
        self, u: float, grid_v: np.ndarray, spec: SmootherSpec
    ) -> tuple[np.ndarray, np.ndarray, int]:
        """Solve every cell ``(u, v)`` for ``v`` in *grid_v*."""
        h = spec.bandwidth
        lo = int(np.searchsorted(self.u, u - h, side="left"))
        hi = int(np.searchsorted(self.u, u + h, side="right"))
        du = (self.u[lo:hi] - u) / h
        a = spec.kernel(du) / h * self.weights[lo:hi]
        theta = self.theta[lo:hi]

        dv = (self.v[lo:hi, None] - grid_v[None, :]) / h
        kv = spec.kernel(dv) / h
        kv_dv = kv * dv

        a_du = a * du
        a_theta = a * theta
        beta0, ok = solve_local_plane(
            a @ kv,
            a_du @ kv,
            a @ kv_dv,
            (a_du * du) @ kv,
            a_du @ kv_dv,
            a @ (kv_dv * dv),
            a_theta @ kv,
            (a_theta * du) @ kv,
            a_theta @ kv_dv,
        )
        return beta0, ok, du.size * (1 + grid_v.size)

    def solve_grid(
        self, grid_u: np.ndarray, grid_v: np.ndarray, spec: SmootherSpec
    ) -> tuple[np.ndarray, np.ndarray, int]:
        """Intercepts, solvable mask and kernel evaluation count on ``grid_u × grid_v``."""
        values = np.full((grid_u.size, grid_v.size), np.nan)
        solvable = np.zeros((grid_u.size, grid_v.size), dtype=bool)
        evaluations = 0
        for r, u in enumerate(grid_u.tolist()):
            beta0, ok, count = self.row(u, grid_v, spec)
            values[r] = beta0
            solvable[r] = ok
            evaluations += count
        return values, solvable, evaluations


def smooth_pairs(
    pairs: PairSet,
    grid_u: Sequence[float] | np.ndarray,
    grid_v: Sequence[float] | np.ndarray,
    spec: SmootherSpec,
    *,
    symmetric: bool = False,
) -> SurfaceEstimate:
    """Local plane fit of arbitrary triples; see :func:`estimate_cov_surface`."""
    gu = np.asarray(grid_u, dtype=np.float64)
    gv = np.asarray(grid_v, dtype=np.float64)
    values, solvable, evaluations = pairs.solve_grid(gu, gv, spec)
    return assemble_surface(
        gu,
        gv,
        values,
        solvable,
        symmetric=symmetric,
        stats={
            "bandwidth": spec.bandwidth,
            "kernel_evaluations": evaluations,
            "pairs": len(pairs),
            "binned": False,
        },
        label="triples",
    )


def estimate_cov_at(
    data: FunctionalDataset,
    j: int,
    k: int,
    u: float,
    v: float,
    spec: SmootherSpec,
    means: Tuple[MeanLike, MeanLike],
    *,
    weights: Optional[WeightsLike] = None,
) -> float:
    """Return the local linear covariance estimate ``Sigma_jk(u, v)``.

    *means* holds the centering curves ``(mean_j, mean_k)``.

    Raises
    ------
    SingularSystemError
        If the local 3×3 system is singular.
    """
    w = resolve_cov_weights(data, j, k, spec.scheme if weights is None else weights)
    pairs = PairSet.build(data, j, k, (means[0], means[1]), w)
    beta0, ok, _ = pairs.row(float(u), np.array([float(v)]), spec)
    if not ok[0]:
        raise SingularSystemError(
            f"covariance system for ({j}, {k}) is singular at (u={u:g}, v={v:g})"
        )
    return float(beta0[0])


def estimate_cov_surface(
    data: FunctionalDataset,
    j: int,
    k: int,
    grid_u: Sequence[float] | np.ndarray,
    grid_v: Sequence[float] | np.ndarray,
    spec: SmootherSpec,
    means: Tuple[MeanLike, MeanLike],
    *,
    weights: Optional[WeightsLike] = None,
) -> SurfaceEstimate:
    """Evaluate ``Sigma_jk`` on ``grid_u × grid_v``.

    Marginal surfaces on identical grids are symmetrised as ``(M + M^T) / 2``.
    """
    gu = np.asarray(grid_u, dtype=np.float64)
    gv = np.asarray(grid_v, dtype=np.float64)
    w = resolve_cov_weights(data, j, k, spec.scheme if weights is None else weights)
    pairs = PairSet.build(data, j, k, (means[0], means[1]), w)
    values, solvable, evaluations = pairs.solve_grid(gu, gv, spec)

    return assemble_surface(
        gu,
        gv,
        values,
        solvable,
        symmetric=(j == k),
        stats={
            "bandwidth": spec.bandwidth,
            "kernel_evaluations": evaluations,
            "pairs": len(pairs),
            "binned": False,
        },
        label=f"({j}, {k})",
    )


def estimate_cov_surfaces(
    data: FunctionalDataset,
    pairs: Iterable[Tuple[int, int]],
    grid: Sequence[float] | np.ndarray,
    spec: SmootherSpec,
    means: Sequence[MeanLike],
) -> Dict[Tuple[int, int], SurfaceEstimate]:
    """Surfaces for each requested ``(j, k)``; *means* is indexed by variable."""
    return {
        (j, k): estimate_cov_surface(data, j, k, grid, grid, spec, (means[j], means[k]))
        for j, k in pairs
    }
