"""Integrated squared errors of estimated curves and surfaces."""
from __future__ import annotations

from enum import Enum
from typing import Callable

import numpy as np
from scipy.integrate import trapezoid

from src.exceptions import IncompleteEstimateError
from src.smoothing.models import CurveEstimate, MeanFunction, SurfaceEstimate

__all__ = ["Quadrature", "SurfaceFunction", "mise_mean", "mise_cov"]

SurfaceFunction = Callable[[np.ndarray, np.ndarray], np.ndarray]


class Quadrature(str, Enum):
    """Integration rule over the estimation grid."""

    TRAPEZOID = "trapezoid"


def _check_rule(quadrature: Quadrature | str) -> None:
    if Quadrature(quadrature) is not Quadrature.TRAPEZOID:  # pragma: no cover
        raise ValueError(f"unsupported quadrature rule: {quadrature!r}")


def mise_mean(
    estimate: CurveEstimate,
    truth: MeanFunction,
    quadrature: Quadrature | str = Quadrature.TRAPEZOID,
) -> float:
    """Return ``∫ (mu_hat - mu)^2`` over the estimate's grid.

    Raises
    ------
    IncompleteEstimateError
        If any grid point of *estimate* failed.
    """
    _check_rule(quadrature)
    if not estimate.is_complete:
        raise IncompleteEstimateError(
            f"curve estimate has {estimate.failure_count} failed grid points"
        )
    diff = estimate.values - np.asarray(truth(estimate.grid), dtype=np.float64)
    return float(trapezoid(diff * diff, estimate.grid))


def mise_cov(
    estimate: SurfaceEstimate,
    truth: SurfaceFunction | np.ndarray,
    quadrature: Quadrature | str = Quadrature.TRAPEZOID,
) -> float:
    """Return ``∫∫ (Sigma_hat - Sigma)^2`` over ``grid_u × grid_v``.

    *truth* is either called with ``ij``-indexed mesh arrays or is the true
    surface already evaluated on the estimate's grid.
    """
    _check_rule(quadrature)
    if not estimate.is_complete:
        raise IncompleteEstimateError(
            f"surface estimate has {estimate.failure_count} failed cells"
        )
    if callable(truth):
        uu, vv = np.meshgrid(estimate.grid_u, estimate.grid_v, indexing="ij")
        truth = truth(uu, vv)
    expected = np.broadcast_to(np.asarray(truth, dtype=np.float64), estimate.values.shape)
    diff = estimate.values - expected
    inner = trapezoid(diff * diff, estimate.grid_v, axis=1)
    return float(trapezoid(inner, estimate.grid_u))
