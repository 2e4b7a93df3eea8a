"""Data structures for the reporting pipeline."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

METRICS = ("AveMISE_mu", "MaxMISE_mu", "AveMISE_sigma", "MaxMISE_sigma")


@dataclass(slots=True)
class MetricRow:
    """One tidy row of the phase-transition results table."""

    rep: int
    p: int
    T: int
    metric: str
    value: float
    status: str = "ok"


@dataclass(slots=True)
class MetricSummary:
    """Replication average of one metric in one ``(p, T)`` cell."""

    p: int
    T: int
    metric: str
    mean: float
    reps_ok: int
    reps_failed: int = 0


@dataclass(slots=True)
class CheckResult:
    """Outcome of one acceptance check, as shown in the verify table."""

    name: str
    measured: float
    tolerance: str
    passed: bool
    detail: str = ""


@dataclass(slots=True)
class FileFailures:
    """Singular cells recorded in one estimate output file."""

    path: str
    failed: int
    total: int

    @property
    def all_failed(self) -> bool:
        return self.total > 0 and self.failed == self.total


@dataclass(slots=True)
class SummaryBlock:
    """Titled ``key = value`` block of a text summary."""

    title: str
    entries: Dict[str, Any] = field(default_factory=dict)
    note: Optional[str] = None


@dataclass(slots=True)
class PhaseTable:
    """Metric averages laid out as one row per ``p`` and one column per ``T``."""

    metric: str
    t_values: List[int]
    rows: Dict[int, List[Optional[float]]] = field(default_factory=dict)
