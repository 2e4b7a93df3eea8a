import numpy as np
import pytest

from src.evaluation.aggregate import aggregate_mises, global_opt_bruteforce
from src.evaluation.report import MiseReport, Target, write_mise_report
from src.exceptions import IncompleteEstimateError, TooLargeError


def _report() -> MiseReport:
    mean = np.array([[0.3, 0.1], [0.5, 0.4]])
    cov = np.array(
        [
            [[0.2, 0.6], [0.9, 0.7]],
            [[0.9, 0.7], [0.8, 0.3]],
        ]
    )
    return MiseReport.from_tables(mean, [0.1, 0.2], cov, [0.1, 0.3])


def test_aggregates_use_best_bandwidth_per_cell():
    aggregates = aggregate_mises(_report())

    assert aggregates.ave_mean == pytest.approx(0.25)
    assert aggregates.max_mean == pytest.approx(0.4)
    assert aggregates.ave_cov == pytest.approx((0.2 + 0.7 + 0.7 + 0.3) / 4)
    assert aggregates.max_cov == pytest.approx(0.7)


def test_aggregate_names():
    assert list(aggregate_mises(_report()).as_dict()) == [
        "AveMISE_mu",
        "MaxMISE_mu",
        "AveMISE_sigma",
        "MaxMISE_sigma",
    ]


def test_missing_table_aggregates_to_none():
    report = MiseReport.from_tables(mise_mean=np.array([[0.1]]))

    aggregates = aggregate_mises(report)

    assert aggregates.ave_cov is None and aggregates.max_cov is None


def test_failed_cells_are_skipped():
    report = MiseReport.from_tables(np.array([[np.nan, 0.2], [0.1, np.nan]]))

    assert aggregate_mises(report).max_mean == pytest.approx(0.2)
    assert report.failed_count == 2


def test_row_without_success_fails():
    report = MiseReport.from_tables(np.array([[np.nan, np.nan], [0.1, 0.2]]))

    with pytest.raises(IncompleteEstimateError):
        aggregate_mises(report)


def test_best_bandwidths():
    np.testing.assert_allclose(_report().best_mean_bandwidths(), [0.2, 0.2])


class TestBruteForce:
    def test_matches_worst_case_aggregate(self):
        rng = np.random.default_rng(0)
        for _ in range(100):
            report = MiseReport.from_tables(rng.uniform(0.0, 1.0, (4, 5)))

            assert global_opt_bruteforce(report, Target.MEAN) == pytest.approx(
                aggregate_mises(report).max_mean
            )

    def test_covariance_uses_upper_triangle(self):
        assert global_opt_bruteforce(_report(), "cov") == pytest.approx(0.7)

    def test_refuses_large_searches(self):
        report = MiseReport.from_tables(np.ones((6, 10)))

        with pytest.raises(TooLargeError):
            global_opt_bruteforce(report, limit=1000)


def test_write_mise_report(tmp_path):
    path = tmp_path / "mise.csv"

    rows = write_mise_report(_report(), path, metadata={"seed": 1})

    lines = path.read_text(encoding="utf-8").splitlines()
    assert rows == 2 * 2 + 3 * 2
    assert lines[:2] == ["# seed=1", "j,k,h,mise,status"]
    assert lines[2].startswith("0,,0.1,0.3,ok")
