"""Rate diagnostics: effective sample sizes, sampling regimes and rate fits.

With ``Tbar_mu = mean_i T_ij`` and ``Tbar_sigma^2 = mean_i T_ij (T_ik - 1{j=k})``
the effective sample sizes are

    gamma = n min(1, Tbar_mu h)        nu = n min(1, Tbar_sigma^2 h^2)

A design is tagged sparse, semi-dense or ultra-dense by comparing the
average sampling frequency with ``n^(1/4) (log p)^(-1/4)``.  The asymptotic
boundary has no finite-sample width, so the semi-dense band is declared as
``[threshold / band, threshold * band]``.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence, Tuple

import numpy as np
from numpy.typing import ArrayLike

from src import config
from src.data.dataset import FunctionalDataset
from src.data.weights import pair_counts
from src.evaluation.report import Target
from src.exceptions import NonPositiveInputError

logger = logging.getLogger(__name__)

__all__ = [
    "RateDiagnostics",
    "Regime",
    "classify_regime",
    "fit_rate_slope",
    "optimal_bandwidth",
    "rate_diagnostics",
    "regime_threshold",
]


class Regime(str, Enum):
    SPARSE = "sparse"
    SEMI_DENSE = "semi-dense"
    ULTRA_DENSE = "ultra-dense"


def _log_p(p: float) -> float:
    return math.log(max(float(p), 2.0))


def regime_threshold(n: int, p: float) -> float:
    """``n^(1/4) (log p)^(-1/4)``; ``p < 2`` is treated as ``p = 2``."""
    return n**0.25 * _log_p(p) ** -0.25


def classify_regime(
    t_bar: float, n: int, p: float, band: float = config.REGIME_BAND
) -> Regime:
    threshold = regime_threshold(n, p)
    if t_bar < threshold / band:
        return Regime.SPARSE
    if t_bar > threshold * band:
        return Regime.ULTRA_DENSE
    return Regime.SEMI_DENSE


@dataclass(frozen=True, slots=True)
class RateDiagnostics:
    """Sampling-frequency summaries of a dataset for given bandwidths."""

    n: int
    p: float
    threshold: float
    t_bar_mean: np.ndarray
    t_bar_cov: np.ndarray
    gamma: np.ndarray
    nu: np.ndarray
    mean_regimes: Tuple[Regime, ...]
    cov_regimes: Tuple[Tuple[Regime, ...], ...]
    regime: Regime


def _per_variable(value: ArrayLike, shape: Tuple[int, ...], name: str) -> np.ndarray:
    arr = np.broadcast_to(np.asarray(value, dtype=np.float64), shape)
    if np.any(arr <= 0):
        raise ValueError(f"{name} must be positive")
    return arr


def rate_diagnostics(
    data: FunctionalDataset,
    h_mu: ArrayLike,
    h_sigma: ArrayLike,
    p: Optional[float] = None,
    *,
    band: float = config.REGIME_BAND,
) -> RateDiagnostics:
    """Compute ``Tbar``, ``gamma``, ``nu`` and regime tags.

    *h_mu* is a scalar or one bandwidth per variable, *h_sigma* a scalar or a
    ``p × p`` matrix.  *p* is the dimension entering ``log p`` (defaults to
    the number of variables).
    """
    n = data.n_subjects
    n_vars = data.n_vars
    dim = float(n_vars if p is None else p)
    counts = data.counts().astype(np.float64)

    t_bar_mean = counts.mean(axis=0)
    t_bar_cov = np.empty((n_vars, n_vars))
    for j in range(n_vars):
        for k in range(n_vars):
            t_bar_cov[j, k] = math.sqrt(float(pair_counts(data, j, k).mean()))

    h_mean = _per_variable(h_mu, (n_vars,), "h_mu")
    h_cov = _per_variable(h_sigma, (n_vars, n_vars), "h_sigma")
    gamma = n * np.minimum(1.0, t_bar_mean * h_mean)
    nu = n * np.minimum(1.0, (t_bar_cov * h_cov) ** 2)

    mean_regimes = tuple(classify_regime(t, n, dim, band) for t in t_bar_mean.tolist())
    cov_regimes = tuple(
        tuple(classify_regime(t, n, dim, band) for t in row) for row in t_bar_cov.tolist()
    )
    overall = classify_regime(float(t_bar_mean.mean()), n, dim, band)
    return RateDiagnostics(
        n=n,
        p=dim,
        threshold=regime_threshold(n, dim),
        t_bar_mean=t_bar_mean,
        t_bar_cov=t_bar_cov,
        gamma=gamma,
        nu=nu,
        mean_regimes=mean_regimes,
        cov_regimes=cov_regimes,
        regime=overall,
    )


def optimal_bandwidth(
    n: int,
    t_bar: float,
    p: float,
    target: Target | str,
    *,
    regime: Optional[Regime | str] = None,
    band: float = config.REGIME_BAND,
) -> float:
    """Rate-optimal bandwidth (unit constant) for the detected or given regime.

    =========== ===================== =========================
    regime      mean                  covariance
    =========== ===================== =========================
    sparse      (log p / n)^(1/5)     (log p / n)^(1/6)
    semi-dense  (log p / n T)^(1/5)   (log p / n T^2)^(1/6)
    ultra-dense (log p / n)^(1/4)     (log p / n)^(1/4)
    =========== ===================== =========================
    """
    if n < 2:
        raise ValueError(f"n must be at least 2, got {n}")
    if p < 2:
        raise ValueError(f"p must be at least 2, got {p}")
    log_p = math.log(p)
    which = Target(target)
    tag = classify_regime(t_bar, n, p, band) if regime is None else Regime(regime)

    if tag is Regime.ULTRA_DENSE:
        return (log_p / n) ** 0.25
    if which is Target.MEAN:
        scale = n if tag is Regime.SPARSE else n * t_bar
        return (log_p / scale) ** 0.2
    scale = n if tag is Regime.SPARSE else n * t_bar**2
    return (log_p / scale) ** (1.0 / 6.0)


def fit_rate_slope(
    xs: Sequence[float] | np.ndarray, ys: Sequence[float] | np.ndarray
) -> Tuple[float, float]:
    """Least-squares ``(slope, intercept)`` of ``log y`` on ``log x``."""
    x = np.asarray(xs, dtype=np.float64)
    y = np.asarray(ys, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("xs and ys must be one-dimensional and of equal length")
    if x.size < 3:
        raise ValueError(f"at least 3 points are required, got {x.size}")
    if np.any(x <= 0) or np.any(y <= 0):
        raise NonPositiveInputError("rate fits need strictly positive xs and ys")
    slope, intercept = np.polyfit(np.log(x), np.log(y), 1)
    return float(slope), float(intercept)
