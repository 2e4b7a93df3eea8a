import math

import numpy as np
import pytest

from src.data.dataset import FunctionalDataset
from src.evaluation.rates import (
    Regime,
    classify_regime,
    fit_rate_slope,
    optimal_bandwidth,
    rate_diagnostics,
    regime_threshold,
)
from src.exceptions import NonPositiveInputError


def test_slope_of_exact_power_law():
    xs = np.array([100.0, 200.0, 400.0, 800.0])

    slope, intercept = fit_rate_slope(xs, 3.0 * xs**-0.8)

    assert slope == pytest.approx(-0.8)
    assert intercept == pytest.approx(math.log(3.0))


def test_slope_needs_three_points():
    with pytest.raises(ValueError):
        fit_rate_slope([1.0, 2.0], [1.0, 2.0])


def test_slope_rejects_nonpositive_values():
    with pytest.raises(NonPositiveInputError):
        fit_rate_slope([1.0, 2.0, 4.0], [1.0, 0.0, 2.0])


@pytest.mark.parametrize(
    "t_bar, expected",
    [(1.0, Regime.SPARSE), (3.5, Regime.SEMI_DENSE), (100.0, Regime.ULTRA_DENSE)],
)
def test_regimes(t_bar, expected):
    assert classify_regime(t_bar, 100, 2) is expected


def test_threshold_treats_small_p_as_two():
    assert regime_threshold(100, 1) == regime_threshold(100, 2)


class TestOptimalBandwidth:
    def test_sparse_mean(self):
        assert optimal_bandwidth(100, 1.0, 10, "mean") == pytest.approx(
            (math.log(10) / 100) ** 0.2
        )

    def test_semi_dense_covariance(self):
        h = optimal_bandwidth(100, 4.0, 10, "cov", regime="semi-dense")

        assert h == pytest.approx((math.log(10) / (100 * 16.0)) ** (1 / 6))

    def test_ultra_dense(self):
        assert optimal_bandwidth(100, 1000.0, 10, "cov") == pytest.approx(
            (math.log(10) / 100) ** 0.25
        )

    def test_rejects_tiny_samples(self):
        with pytest.raises(ValueError):
            optimal_bandwidth(1, 1.0, 10, "mean")


def test_rate_diagnostics():
    times = np.tile(np.linspace(0.1, 0.9, 4), (10, 1, 1))
    data = FunctionalDataset.from_arrays(times, np.zeros_like(times))

    diagnostics = rate_diagnostics(data, 0.1, 0.1)

    assert diagnostics.t_bar_mean.tolist() == [4.0]
    assert diagnostics.t_bar_cov[0, 0] == pytest.approx(math.sqrt(12.0))
    assert diagnostics.gamma[0] == pytest.approx(4.0)
    assert diagnostics.nu[0, 0] == pytest.approx(1.2)
