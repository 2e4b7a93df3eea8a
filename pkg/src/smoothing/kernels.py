"""Compactly supported smoothing kernels on ``[-1, 1]``."""
from __future__ import annotations

from enum import Enum

import numpy as np
from numpy.typing import ArrayLike

__all__ = ["Kernel", "kernel_eval", "epanechnikov", "uniform", "triangular"]


def epanechnikov(u: np.ndarray) -> np.ndarray:
    inside = np.abs(u) <= 1.0
    return np.where(inside, 0.75 * (1.0 - u * u), 0.0)


def uniform(u: np.ndarray) -> np.ndarray:
    return np.where(np.abs(u) <= 1.0, 0.5, 0.0)


def triangular(u: np.ndarray) -> np.ndarray:
    return np.clip(1.0 - np.abs(u), 0.0, None)


class Kernel(str, Enum):
    """Symmetric probability densities supported on ``[-1, 1]``."""

    EPANECHNIKOV = "epanechnikov"
    UNIFORM = "uniform"
    TRIANGULAR = "triangular"

    def __call__(self, u: ArrayLike) -> np.ndarray:
        arr = np.asarray(u, dtype=np.float64)
        # Resolved at call time so the evaluators can be swapped in tests.
        if self is Kernel.EPANECHNIKOV:
            return epanechnikov(arr)
        if self is Kernel.UNIFORM:
            return uniform(arr)
        return triangular(arr)

    def scaled(self, x: ArrayLike, bandwidth: float) -> np.ndarray:
        """Return ``K_h(x) = K(x / h) / h``."""
        return self(np.asarray(x, dtype=np.float64) / bandwidth) / bandwidth


def kernel_eval(kernel: Kernel, u: float) -> float:
    """Return ``K(u)``; zero outside the support."""
    return float(Kernel(kernel)(u))
