"""Process-wide defaults, overridable through environment variables or ``.env``."""
from __future__ import annotations

import os

from dotenv import load_dotenv

load_dotenv()

LOG_LEVEL: str = os.getenv("FDA_LOG_LEVEL", "INFO")

# Worker threads used by experiment harnesses
THREADS: int = int(os.getenv("FDA_THREADS", "1"))

# Number of equispaced bins (and evaluation grid points) on [0, 1]
BIN_COUNT: int = int(os.getenv("FDA_BIN_COUNT", "100"))

# Geometric bandwidth grid used when a config does not list bandwidths
BANDWIDTH_MIN: float = float(os.getenv("FDA_BANDWIDTH_MIN", "0.02"))
BANDWIDTH_MAX: float = float(os.getenv("FDA_BANDWIDTH_MAX", "0.5"))
BANDWIDTH_COUNT: int = int(os.getenv("FDA_BANDWIDTH_COUNT", "15"))

# Relative determinant tolerance for the closed-form local solves
DETERMINANT_TOLERANCE: float = float(
    os.getenv("FDA_DETERMINANT_TOLERANCE", "1e-12")
)

# Largest r**p enumeration allowed for the brute-force global optimum
BRUTEFORCE_LIMIT: int = int(os.getenv("FDA_BRUTEFORCE_LIMIT", "10000000"))

# Multiplicative half-width of the semi-dense band around n^(1/4) (log p)^(-1/4)
REGIME_BAND: float = float(os.getenv("FDA_REGIME_BAND", "2.0"))
