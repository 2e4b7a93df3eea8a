"""Value objects shared by the exact and binned smoothers."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Tuple, Union

import numpy as np

from src.data.weights import WeightScheme
from src.smoothing.kernels import Kernel

logger = logging.getLogger(__name__)

MeanFunction = Callable[[np.ndarray], np.ndarray]


def _grid(points: Any, name: str) -> np.ndarray:
    arr = np.asarray(points, dtype=np.float64).ravel()
    if arr.size == 0:
        raise ValueError(f"{name} must not be empty")
    if arr.size > 1 and np.any(np.diff(arr) <= 0):
        raise ValueError(f"{name} must be strictly increasing")
    if arr[0] < 0.0 or arr[-1] > 1.0:
        raise ValueError(f"{name} must lie in [0, 1]")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, slots=True)
class SmootherSpec:
    """Kernel, bandwidth ``h`` and weighting scheme of a local linear fit."""

    bandwidth: float
    kernel: Kernel = Kernel.EPANECHNIKOV
    scheme: WeightScheme = WeightScheme.PER_OBSERVATION

    def __post_init__(self) -> None:
        if not 0.0 < self.bandwidth <= 1.0:
            raise ValueError(f"bandwidth must lie in (0, 1], got {self.bandwidth!r}")
        object.__setattr__(self, "kernel", Kernel(self.kernel))
        object.__setattr__(self, "scheme", WeightScheme(self.scheme))

    def with_bandwidth(self, bandwidth: float) -> "SmootherSpec":
        return SmootherSpec(bandwidth, self.kernel, self.scheme)


@dataclass(frozen=True, slots=True)
class CurveEstimate:
    """Estimated curve on a strictly increasing grid; ``nan`` where unsolvable."""

    grid: np.ndarray
    values: np.ndarray
    failures: Tuple[int, ...] = ()
    stats: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        grid = _grid(self.grid, "grid")
        values = np.asarray(self.values, dtype=np.float64).ravel().copy()
        if values.shape != grid.shape:
            raise ValueError("values must match the grid length")
        failures = tuple(sorted(int(i) for i in self.failures))
        values[list(failures)] = np.nan
        if not np.all(np.isfinite(np.delete(values, failures))):
            raise ValueError("values must be finite outside recorded failures")
        values.setflags(write=False)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "failures", failures)

    @property
    def failure_count(self) -> int:
        return len(self.failures)

    @property
    def is_complete(self) -> bool:
        return not self.failures

    def interpolator(self) -> MeanFunction:
        """Return a linear interpolant through the solvable grid points."""
        keep = np.isfinite(self.values)
        if not np.any(keep):
            raise ValueError("curve has no solvable grid points to interpolate")
        xs = self.grid[keep]
        ys = self.values[keep]

        def _interp(u: np.ndarray) -> np.ndarray:
            return np.interp(np.asarray(u, dtype=np.float64), xs, ys)

        return _interp


@dataclass(frozen=True, slots=True)
class SurfaceEstimate:
    """Estimated surface on ``grid_u × grid_v``; ``nan`` where unsolvable."""

    grid_u: np.ndarray
    grid_v: np.ndarray
    values: np.ndarray
    failures: Tuple[Tuple[int, int], ...] = ()
    stats: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        grid_u = _grid(self.grid_u, "grid_u")
        grid_v = _grid(self.grid_v, "grid_v")
        values = np.array(self.values, dtype=np.float64)
        if values.shape != (grid_u.size, grid_v.size):
            raise ValueError("values must be a len(grid_u) x len(grid_v) matrix")
        failures = tuple(sorted((int(r), int(c)) for r, c in self.failures))
        for r, c in failures:
            values[r, c] = np.nan
        mask = np.ones(values.shape, dtype=bool)
        for r, c in failures:
            mask[r, c] = False
        if not np.all(np.isfinite(values[mask])):
            raise ValueError("values must be finite outside recorded failures")
        values.setflags(write=False)
        object.__setattr__(self, "grid_u", grid_u)
        object.__setattr__(self, "grid_v", grid_v)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "failures", failures)

    @property
    def failure_count(self) -> int:
        return len(self.failures)

    @property
    def is_complete(self) -> bool:
        return not self.failures

    def transpose(self) -> "SurfaceEstimate":
        """Return the surface with the roles of ``u`` and ``v`` swapped."""
        return SurfaceEstimate(
            self.grid_v,
            self.grid_u,
            self.values.T,
            tuple((c, r) for r, c in self.failures),
            dict(self.stats),
        )


def assemble_surface(
    grid_u: np.ndarray,
    grid_v: np.ndarray,
    values: np.ndarray,
    solvable: np.ndarray,
    *,
    symmetric: bool,
    stats: Dict[str, Any],
    label: str,
) -> SurfaceEstimate:
    """Package solved cells, symmetrising marginal surfaces on identical grids.

    A symmetrised cell is kept only if both ``(r, c)`` and ``(c, r)`` solved.
    """
    if symmetric and grid_u.shape == grid_v.shape and np.array_equal(grid_u, grid_v):
        solvable = solvable & solvable.T
        values = np.where(solvable, values, 0.0)
        values = 0.5 * (values + values.T)
    failures = tuple((int(r), int(c)) for r, c in np.argwhere(~solvable))
    values = np.where(solvable, values, np.nan)
    if failures:
        logger.warning(
            "Covariance surface %s: %d/%d cells singular (h=%s)",
            label,
            len(failures),
            solvable.size,
            stats.get("bandwidth"),
        )
    return SurfaceEstimate(grid_u, grid_v, values, failures, dict(stats))


MeanLike = Union[MeanFunction, CurveEstimate]


def as_mean_function(mean: MeanLike) -> MeanFunction:
    """Accept an analytic mean or a :class:`CurveEstimate` (linearly interpolated)."""
    if isinstance(mean, CurveEstimate):
        return mean.interpolator()
    return mean
