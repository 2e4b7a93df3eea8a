"""Experiment configuration files.

Configs are flat ``key=value`` files in dotenv syntax; list values are comma
separated and keys are case-insensitive.  Unknown keys are rejected so a
misspelled knob never silently falls back to its default.
"""
from __future__ import annotations

import hashlib
import logging
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Callable, Dict, Mapping, Optional, Tuple

import numpy as np
from dotenv import dotenv_values

from src import config
from src.data.weights import WeightScheme
from src.evaluation.report import Target
from src.evaluation.sweep import Centering, SweepSettings, default_bandwidth_grid
from src.exceptions import ConfigError
from src.simulation.generator import SimulationConfig
from src.smoothing.binning import bin_centers
from src.smoothing.kernels import Kernel

logger = logging.getLogger(__name__)

__all__ = ["ExperimentConfig", "load_config"]

# Keys that never change numerical output and stay out of the config hash.
_RUNTIME_KEYS = frozenset({"threads", "out_dir"})


def _parse_bool(raw: str) -> bool:
    lowered = raw.strip().lower()
    if lowered in {"1", "true", "yes", "on"}:
        return True
    if lowered in {"0", "false", "no", "off"}:
        return False
    raise ValueError(f"expected a boolean, got {raw!r}")


def _parse_ints(raw: str) -> Tuple[int, ...]:
    return tuple(int(item) for item in raw.split(",") if item.strip())


def _parse_floats(raw: str) -> Tuple[float, ...]:
    return tuple(float(item) for item in raw.split(",") if item.strip())


def _format(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, tuple):
        return ",".join(_format(item) for item in value)
    if hasattr(value, "value"):
        return str(value.value)
    return str(value)


@dataclass(frozen=True, slots=True)
class ExperimentConfig:
    """Simulation, estimator and harness settings of one experiment."""

    # simulation
    n: int = 100
    p: int = 5
    t: int = 10
    rho: float = 0.5
    noise_sd: float = 0.5
    seed: int = 0
    shared_times: bool = False
    zero_scores: bool = False
    # sweep axes
    p_values: Tuple[int, ...] = (5, 10, 20)
    t_values: Tuple[int, ...] = (5, 10, 20, 40, 80, 160)
    n_values: Tuple[int, ...] = (100, 200, 400, 800, 1600)
    reps: int = 20
    # estimators
    scheme: WeightScheme = WeightScheme.PER_OBSERVATION
    binned: bool = False
    bin_count: int = config.BIN_COUNT
    kernel: Kernel = Kernel.EPANECHNIKOV
    bandwidths_mean: Tuple[float, ...] = ()
    bandwidths_cov: Tuple[float, ...] = ()
    bandwidth_min: float = config.BANDWIDTH_MIN
    bandwidth_max: float = config.BANDWIDTH_MAX
    bandwidth_count: int = config.BANDWIDTH_COUNT
    centering: Centering = Centering.ESTIMATED
    # rate study: h = c n^(-1/5) for means, c n^(-1/6) for covariances
    rate_constant_mean: float = 0.6
    rate_constant_cov: float = 0.6
    # runtime
    threads: int = config.THREADS
    out_dir: str = field(default="out")

    def __post_init__(self) -> None:
        object.__setattr__(self, "scheme", WeightScheme(self.scheme))
        object.__setattr__(self, "kernel", Kernel(self.kernel))
        object.__setattr__(self, "centering", Centering(self.centering))
        if self.reps < 1:
            raise ConfigError(f"reps must be at least 1, got {self.reps}")
        for name in ("p_values", "t_values", "n_values"):
            if not getattr(self, name):
                raise ConfigError(f"{name} must not be empty")
        if self.threads < 1:
            raise ConfigError(f"threads must be at least 1, got {self.threads}")
        if self.bin_count < 2:
            raise ConfigError(f"bin_count must be at least 2, got {self.bin_count}")

    # ------------------------------------------------------------------
    # Construction
    # ------------------------------------------------------------------
    @classmethod
    def from_mapping(
        cls, values: Mapping[str, Optional[str]], *, source: str = "<mapping>"
    ) -> "ExperimentConfig":
        """Parse raw string values; unknown keys raise :class:`ConfigError`."""
        parsed: Dict[str, Any] = {}
        for raw_key, raw_value in values.items():
            key = raw_key.strip().lower()
            parser = _PARSERS.get(key)
            if parser is None:
                raise ConfigError(f"{source}: unknown config key {raw_key!r}")
            if raw_value is None:
                raise ConfigError(f"{source}: key {raw_key!r} has no value")
            try:
                parsed[key] = parser(raw_value.strip())
            except ValueError as exc:
                raise ConfigError(f"{source}: bad value for {key!r}: {exc}") from exc
        try:
            return cls(**parsed)
        except ValueError as exc:
            raise ConfigError(f"{source}: {exc}") from exc

    def with_overrides(self, **overrides: Any) -> "ExperimentConfig":
        """Copy with the non-``None`` *overrides* applied."""
        return replace(self, **{k: v for k, v in overrides.items() if v is not None})

    # ------------------------------------------------------------------
    # Derived settings
    # ------------------------------------------------------------------
    def simulation(
        self,
        *,
        n: Optional[int] = None,
        p: Optional[int] = None,
        t: Optional[int] = None,
        seed: Optional[int] = None,
    ) -> SimulationConfig:
        return SimulationConfig(
            n=self.n if n is None else n,
            p=self.p if p is None else p,
            T=self.t if t is None else t,
            rho=self.rho,
            noise_sd=self.noise_sd,
            seed=self.seed if seed is None else seed,
            shared_times=self.shared_times,
            zero_scores=self.zero_scores,
        )

    def sweep_settings(self) -> SweepSettings:
        return SweepSettings(self.scheme, self.binned, self.kernel, self.bin_count)

    def grid(self) -> np.ndarray:
        """Evaluation grid: the ``bin_count`` equispaced bin nodes."""
        return np.array(bin_centers(self.bin_count))

    def bandwidths(self, target: Target | str) -> np.ndarray:
        explicit = self.bandwidths_mean if Target(target) is Target.MEAN else self.bandwidths_cov
        if explicit:
            return np.asarray(explicit, dtype=np.float64)
        return default_bandwidth_grid(self.bandwidth_min, self.bandwidth_max, self.bandwidth_count)

    # ------------------------------------------------------------------
    # Provenance
    # ------------------------------------------------------------------
    def canonical_lines(self) -> list[str]:
        """Sorted ``key=value`` lines of every setting that affects results."""
        return sorted(
            f"{f.name}={_format(getattr(self, f.name))}"
            for f in fields(self)
            if f.name not in _RUNTIME_KEYS
        )

    @property
    def config_hash(self) -> str:
        digest = hashlib.sha256("\n".join(self.canonical_lines()).encode("utf-8"))
        return digest.hexdigest()[:16]

    def metadata(self, **extra: object) -> Dict[str, object]:
        """Provenance embedded in output files."""
        return {"config_hash": self.config_hash, "seed": self.seed, **extra}


_PARSERS: Dict[str, Callable[[str], Any]] = {
    "n": int,
    "p": int,
    "t": int,
    "rho": float,
    "noise_sd": float,
    "seed": int,
    "shared_times": _parse_bool,
    "zero_scores": _parse_bool,
    "p_values": _parse_ints,
    "t_values": _parse_ints,
    "n_values": _parse_ints,
    "reps": int,
    "scheme": WeightScheme,
    "binned": _parse_bool,
    "bin_count": int,
    "kernel": Kernel,
    "bandwidths_mean": _parse_floats,
    "bandwidths_cov": _parse_floats,
    "bandwidth_min": float,
    "bandwidth_max": float,
    "bandwidth_count": int,
    "centering": Centering,
    "rate_constant_mean": float,
    "rate_constant_cov": float,
    "threads": int,
    "out_dir": str,
}


def load_config(path: str | Path) -> ExperimentConfig:
    """Read an experiment config file."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    values = dotenv_values(path)
    cfg = ExperimentConfig.from_mapping(values, source=str(path))
    logger.debug("Loaded config %s (hash=%s)", path, cfg.config_hash)
    return cfg
