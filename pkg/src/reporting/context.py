"""Context dataclasses for rendering text reports.

Each context holds every value its Jinja2 template under
``src/reporting/templates/`` expects, so the numerics that fill it can be
tested without touching template strings.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, Iterable, List, Optional

from src.reporting import config
from src.reporting.aggregator import phase_table
from src.reporting.models import (
    METRICS,
    CheckResult,
    FileFailures,
    MetricSummary,
    SummaryBlock,
)

__all__ = [
    "FailuresContext",
    "PhaseContext",
    "RateContext",
    "SweepContext",
    "VerifyContext",
    "fmt",
    "summary_block",
]


def fmt(value: Any, digits: int = config.SUMMARY_DIGITS) -> str:
    """Format numbers for text summaries; missing values print as ``-``."""
    if value is None:
        return "-"
    if isinstance(value, bool):
        return "yes" if value else "no"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            return "-"
        return f"{value:.{digits}g}"
    return str(value)


@dataclass(slots=True)
class _Context:
    config_hash: str
    seed: int

    def to_dict(self) -> Dict[str, Any]:  # noqa: D401 – simple helper
        """Return a *plain* ``dict`` (recursively) for Jinja rendering."""
        return asdict(self)


@dataclass(slots=True)
class PhaseContext(_Context):
    """Phase-transition summary: one ``p × T`` table per metric plus checks."""

    n: int = 0
    reps: int = 0
    binned: bool = False
    tables: List[Dict[str, Any]] = field(default_factory=list)
    checks: List[CheckResult] = field(default_factory=list)
    failed_cells: int = 0

    @classmethod
    def build(
        cls,
        *,
        config_hash: str,
        seed: int,
        n: int,
        reps: int,
        binned: bool,
        summaries: List[MetricSummary],
        checks: Iterable[CheckResult] = (),
        failed_cells: int = 0,
    ) -> "PhaseContext":
        tables = []
        for metric in METRICS:
            table = phase_table(summaries, metric)
            tables.append(
                {
                    "metric": metric,
                    "t_values": table.t_values,
                    "rows": [
                        {"p": p, "cells": [fmt(v) for v in values]}
                        for p, values in table.rows.items()
                    ],
                }
            )
        return cls(
            config_hash=config_hash,
            seed=seed,
            n=n,
            reps=reps,
            binned=binned,
            tables=tables,
            checks=list(checks),
            failed_cells=failed_cells,
        )


@dataclass(slots=True)
class VerifyContext:
    """Pass/fail table of the acceptance suite."""

    checks: List[CheckResult]
    full: bool = False

    @property
    def passed(self) -> int:
        return sum(check.passed for check in self.checks)

    def to_dict(self) -> Dict[str, Any]:
        width = max((len(check.name) for check in self.checks), default=4)
        return {
            "rows": [
                {
                    "name": check.name.ljust(width),
                    "status": "PASS" if check.passed else "FAIL",
                    "measured": fmt(check.measured),
                    "tolerance": check.tolerance,
                    "detail": check.detail,
                }
                for check in self.checks
            ],
            "passed": self.passed,
            "total": len(self.checks),
            "all_passed": self.passed == len(self.checks),
            "full": self.full,
        }


@dataclass(slots=True)
class FailuresContext(_Context):
    """Per-file counts of singular evaluation points."""

    files: List[FileFailures] = field(default_factory=list)
    error: Optional[str] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "config_hash": self.config_hash,
            "seed": self.seed,
            "files": [asdict(item) for item in self.files],
            "total_failed": sum(item.failed for item in self.files),
            "total_cells": sum(item.total for item in self.files),
            "error": self.error,
        }


@dataclass(slots=True)
class RateContext(_Context):
    """Averages per sample size and fitted log-log slopes."""

    rows: List[Dict[str, str]] = field(default_factory=list)
    blocks: List[SummaryBlock] = field(default_factory=list)
    checks: List[CheckResult] = field(default_factory=list)


@dataclass(slots=True)
class SweepContext(_Context):
    """Aggregates, global optimum identity and rate diagnostics of one sweep."""

    blocks: List[SummaryBlock] = field(default_factory=list)
    note: Optional[str] = None


def summary_block(
    title: str, entries: Dict[str, Any], note: Optional[str] = None
) -> SummaryBlock:
    """Titled block with every value formatted for display."""
    return SummaryBlock(title, {key: fmt(value) for key, value in entries.items()}, note)
