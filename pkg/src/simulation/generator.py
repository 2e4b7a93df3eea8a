"""Seeded generator of multivariate functional data.

Subject ``i`` draws its coefficients, times and noise from three independent
streams keyed by ``(seed, i, role)``, so a dataset does not depend on the
order (or thread) in which subjects are generated.

Coefficients follow ``Lambda_jk = rho^|j - k| diag(d)``: for each basis
component an AR(1) recursion across variables

    zeta_1 ~ N(0, 1),   zeta_j = rho zeta_{j-1} + sqrt(1 - rho^2) eta_j

scaled by ``sqrt(d_m)``.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import IntEnum

import numpy as np

from src.data.dataset import FunctionalDataset
from src.simulation.truth import COMPONENT_VARIANCES, GroundTruth, fourier_basis, true_mean

logger = logging.getLogger(__name__)

__all__ = [
    "SimulationConfig",
    "StreamRole",
    "generate_dataset",
    "generate_scores",
    "subject_stream",
]


class StreamRole(IntEnum):
    COEFFICIENTS = 0
    TIMES = 1
    NOISE = 2


@dataclass(frozen=True, slots=True)
class SimulationConfig:
    """Parameters of the data-generating process."""

    n: int
    p: int
    T: int
    rho: float = 0.5
    noise_sd: float = 0.5
    seed: int = 0
    # Same time points for every variable of a subject.
    shared_times: bool = False
    # theta == 0, so each curve is the mean function.
    zero_scores: bool = False

    def __post_init__(self) -> None:
        for name in ("n", "p", "T"):
            if int(getattr(self, name)) < 1:
                raise ValueError(f"{name} must be at least 1, got {getattr(self, name)!r}")
        if not -1.0 < self.rho < 1.0:
            raise ValueError(f"rho must lie in (-1, 1), got {self.rho!r}")
        if self.noise_sd < 0.0 or not np.isfinite(self.noise_sd):
            raise ValueError(f"noise_sd must be finite and nonnegative, got {self.noise_sd!r}")
        if not 0 <= self.seed < 2**64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {self.seed!r}")

    @property
    def truth(self) -> GroundTruth:
        return GroundTruth(rho=self.rho, n_vars=self.p)


def subject_stream(seed: int, subject: int, role: StreamRole) -> np.random.Generator:
    """Counter-based generator for one ``(seed, subject, role)`` substream."""
    sequence = np.random.SeedSequence([int(seed), int(subject), int(role)])
    return np.random.Generator(np.random.Philox(sequence))


def _subject_scores(config: SimulationConfig, subject: int) -> np.ndarray:
    """``p × 4`` coefficient matrix ``theta_i``."""
    if config.zero_scores:
        return np.zeros((config.p, COMPONENT_VARIANCES.size))
    rng = subject_stream(config.seed, subject, StreamRole.COEFFICIENTS)
    draws = rng.standard_normal((config.p, COMPONENT_VARIANCES.size))
    innovation = np.sqrt(1.0 - config.rho**2)
    zeta = np.empty_like(draws)
    zeta[0] = draws[0]
    for j in range(1, config.p):
        zeta[j] = config.rho * zeta[j - 1] + innovation * draws[j]
    return zeta * np.sqrt(COMPONENT_VARIANCES)


def generate_scores(config: SimulationConfig) -> np.ndarray:
    """Return the ``n × p × 4`` coefficients ``theta_ijm`` of every subject."""
    return np.stack([_subject_scores(config, i) for i in range(config.n)])


def _subject_arrays(
    config: SimulationConfig, subject: int
) -> tuple[np.ndarray, np.ndarray]:
    theta = _subject_scores(config, subject)
    time_rng = subject_stream(config.seed, subject, StreamRole.TIMES)
    if config.shared_times:
        times = np.broadcast_to(time_rng.uniform(0.0, 1.0, config.T), (config.p, config.T))
    else:
        times = time_rng.uniform(0.0, 1.0, (config.p, config.T))

    if config.noise_sd > 0.0:
        noise_rng = subject_stream(config.seed, subject, StreamRole.NOISE)
        noise = noise_rng.normal(0.0, config.noise_sd, (config.p, config.T))
    else:
        noise = np.zeros((config.p, config.T))

    # basis: p × T × 4, theta: p × 4
    latent = true_mean(times) + np.einsum("jtm,jm->jt", fourier_basis(times), theta)
    return np.array(times), latent + noise


def generate_dataset(config: SimulationConfig) -> tuple[FunctionalDataset, GroundTruth]:
    """Simulate ``n`` subjects with ``p`` variables observed ``T`` times each."""
    times = np.empty((config.n, config.p, config.T))
    values = np.empty((config.n, config.p, config.T))
    for i in range(config.n):
        times[i], values[i] = _subject_arrays(config, i)
    logger.debug(
        "Simulated dataset n=%d p=%d T=%d rho=%g seed=%d",
        config.n,
        config.p,
        config.T,
        config.rho,
        config.seed,
    )
    return FunctionalDataset.from_arrays(times, values), config.truth
