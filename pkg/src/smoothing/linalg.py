"""Closed-form solves of the local normal equations.

Both solvers are vectorised over evaluation points and return the intercept
together with a boolean mask of the points whose system was solvable.  A
system is singular when ``|det|`` is at most ``tolerance`` times the matching
power of the trace.
"""
from __future__ import annotations

import numpy as np

from src import config


def solve_local_linear(
    s0: np.ndarray,
    s1: np.ndarray,
    s2: np.ndarray,
    r0: np.ndarray,
    r1: np.ndarray,
    tolerance: float = config.DETERMINANT_TOLERANCE,
) -> tuple[np.ndarray, np.ndarray]:
    """Intercept of ``[[s0, s1], [s1, s2]] b = [r0, r1]``."""
    s0, s1, s2, r0, r1 = np.broadcast_arrays(
        *(np.asarray(a, dtype=np.float64) for a in (s0, s1, s2, r0, r1))
    )
    det = s0 * s2 - s1 * s1
    scale = (s0 + s2) ** 2
    ok = (s0 > 0.0) & (np.abs(det) > tolerance * scale)
    with np.errstate(divide="ignore", invalid="ignore"):
        b0 = np.where(ok, (s2 * r0 - s1 * r1) / np.where(ok, det, 1.0), np.nan)
    return b0, ok


def solve_local_plane(
    m00: np.ndarray,
    m01: np.ndarray,
    m02: np.ndarray,
    m11: np.ndarray,
    m12: np.ndarray,
    m22: np.ndarray,
    z0: np.ndarray,
    z1: np.ndarray,
    z2: np.ndarray,
    tolerance: float = config.DETERMINANT_TOLERANCE,
) -> tuple[np.ndarray, np.ndarray]:
    """Intercept of the symmetric 3×3 system ``Xi beta = Z`` via cofactors."""
    arrays = np.broadcast_arrays(
        *(
            np.asarray(a, dtype=np.float64)
            for a in (m00, m01, m02, m11, m12, m22, z0, z1, z2)
        )
    )
    m00, m01, m02, m11, m12, m22, z0, z1, z2 = arrays
    c00 = m11 * m22 - m12 * m12
    c01 = m02 * m12 - m01 * m22
    c02 = m01 * m12 - m02 * m11
    det = m00 * c00 + m01 * c01 + m02 * c02
    scale = np.abs(m00 + m11 + m22) ** 3
    ok = (m00 > 0.0) & (np.abs(det) > tolerance * scale)
    with np.errstate(divide="ignore", invalid="ignore"):
        beta0 = np.where(
            ok, (c00 * z0 + c01 * z1 + c02 * z2) / np.where(ok, det, 1.0), np.nan
        )
    return beta0, ok
