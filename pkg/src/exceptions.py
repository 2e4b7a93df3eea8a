"""Project-wide custom exception types."""

from __future__ import annotations


class FdaError(RuntimeError):
    """Base class for every error raised by the estimation pipeline."""

    def __init__(self, message: str) -> None:  # noqa: D401 – simple constructor
        super().__init__(message)


class AllEmptyError(FdaError):
    """Raised when every subject has zero observations for a variable."""


class NoPairsError(FdaError):
    """Raised when no subject contributes a valid (t, s) pair for a (j, k) triple."""


class SingularSystemError(FdaError):
    """Raised when a local normal-equations system cannot be solved."""


class BandwidthTooSmallForGridError(FdaError):
    """Raised when a binned smoother window would contain at most one bin."""

    def __init__(self, bandwidth: float, bin_count: int) -> None:
        self.bandwidth = bandwidth
        self.bin_count = bin_count
        minimum = 2.0 / (bin_count - 1)
        super().__init__(
            f"bandwidth {bandwidth:g} is below the binned minimum {minimum:g} "
            f"for {bin_count} bins"
        )


class IncompleteEstimateError(FdaError):
    """Raised when an accuracy metric is requested for an estimate with failures."""


class TooLargeError(FdaError):
    """Raised when a brute-force enumeration exceeds the configured limit."""


class NonPositiveInputError(FdaError):
    """Raised when a log-scale fit receives a non-positive value."""


class ConfigError(FdaError):
    """Raised for unknown keys or malformed values in an experiment config."""


class DatasetFormatError(FdaError):
    """Raised when a long-format dataset file contains a malformed row."""

    def __init__(self, path: str, line: int, reason: str) -> None:
        self.path = path
        self.line = line
        super().__init__(f"{path}:{line}: {reason}")
