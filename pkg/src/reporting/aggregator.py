"""Aggregate per-replication metric rows into ``(p, T)`` summaries."""

from __future__ import annotations

import logging
import math
from collections import defaultdict
from typing import Dict, Iterable, List, Optional, Tuple

from src.reporting.models import METRICS, MetricRow, MetricSummary, PhaseTable

logger = logging.getLogger(__name__)


def summarize_metrics(rows: Iterable[MetricRow]) -> List[MetricSummary]:
    """Average every metric over replications, skipping failed rows.

    The result is sorted by ``(p, T, metric)`` with metrics in their
    canonical order.
    """
    values: Dict[Tuple[int, int, str], List[float]] = defaultdict(list)
    failed: Dict[Tuple[int, int, str], int] = defaultdict(int)
    for row in rows:
        key = (row.p, row.T, row.metric)
        if row.status == "ok" and math.isfinite(row.value):
            values[key].append(row.value)
        else:
            failed[key] += 1

    order = {metric: index for index, metric in enumerate(METRICS)}
    keys = sorted(set(values) | set(failed), key=lambda k: (k[0], k[1], order.get(k[2], 99)))
    summaries = []
    for key in keys:
        ok = values.get(key, [])
        mean = math.fsum(ok) / len(ok) if ok else math.nan
        summaries.append(MetricSummary(key[0], key[1], key[2], mean, len(ok), failed.get(key, 0)))
    skipped = sum(failed.values())
    if skipped:
        logger.warning("Skipped %d failed metric rows while summarising", skipped)
    return summaries


def series_by_p(
    summaries: Iterable[MetricSummary], metric: str
) -> Dict[int, Tuple[List[int], List[float]]]:
    """``p -> (T values, means)`` for *metric*, omitting cells without data."""
    series: Dict[int, Tuple[List[int], List[float]]] = {}
    for item in summaries:
        if item.metric != metric or not math.isfinite(item.mean):
            continue
        ts, means = series.setdefault(item.p, ([], []))
        ts.append(item.T)
        means.append(item.mean)
    return dict(sorted(series.items()))


def phase_table(summaries: Iterable[MetricSummary], metric: str) -> PhaseTable:
    """Lay out one metric as a ``p × T`` table (``None`` where missing)."""
    items = [item for item in summaries if item.metric == metric]
    t_values = sorted({item.T for item in items})
    table = PhaseTable(metric=metric, t_values=t_values)
    lookup: Dict[Tuple[int, int], float] = {(item.p, item.T): item.mean for item in items}
    for p in sorted({item.p for item in items}):
        row: List[Optional[float]] = []
        for t in t_values:
            value = lookup.get((p, t), math.nan)
            row.append(value if math.isfinite(value) else None)
        table.rows[p] = row
    return table
