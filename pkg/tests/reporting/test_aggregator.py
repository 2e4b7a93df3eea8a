"""Unit tests for metric aggregation."""
from __future__ import annotations

import math

import pytest

from src.reporting.aggregator import phase_table, series_by_p, summarize_metrics
from src.reporting.models import MetricRow


@pytest.fixture()
def rows():
    return [
        MetricRow(0, 10, 5, "MaxMISE_mu", 0.4),
        MetricRow(0, 10, 5, "AveMISE_mu", 0.2),
        MetricRow(1, 10, 5, "AveMISE_mu", 0.4),
        MetricRow(0, 5, 20, "AveMISE_mu", 0.1),
        MetricRow(1, 5, 20, "AveMISE_mu", math.nan, "failed"),
    ]


def test_summaries_average_over_replications(rows):
    summaries = summarize_metrics(rows)

    ave = next(s for s in summaries if (s.p, s.T, s.metric) == (10, 5, "AveMISE_mu"))
    assert ave.mean == pytest.approx(0.3)
    assert ave.reps_ok == 2 and ave.reps_failed == 0


def test_failed_rows_are_counted_not_averaged(rows):
    summaries = summarize_metrics(rows)

    cell = next(s for s in summaries if (s.p, s.T) == (5, 20))
    assert cell.mean == pytest.approx(0.1)
    assert cell.reps_failed == 1


def test_summaries_are_sorted_with_metrics_in_canonical_order(rows):
    keys = [(s.p, s.T, s.metric) for s in summarize_metrics(rows)]

    assert keys == [(5, 20, "AveMISE_mu"), (10, 5, "AveMISE_mu"), (10, 5, "MaxMISE_mu")]


def test_all_failed_cell_has_nan_mean():
    summaries = summarize_metrics([MetricRow(0, 5, 5, "AveMISE_mu", math.nan, "failed")])

    assert math.isnan(summaries[0].mean)


def test_series_by_p(rows):
    series = series_by_p(summarize_metrics(rows), "AveMISE_mu")

    assert list(series) == [5, 10]
    assert series[10] == ([5], [pytest.approx(0.3)])


def test_phase_table_leaves_gaps(rows):
    table = phase_table(summarize_metrics(rows), "AveMISE_mu")

    assert table.t_values == [5, 20]
    assert table.rows[5] == [None, pytest.approx(0.1)]
    assert table.rows[10][1] is None
