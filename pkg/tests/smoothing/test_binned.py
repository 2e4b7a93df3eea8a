import numpy as np
import pytest

from src.data.dataset import FunctionalDataset
from src.exceptions import BandwidthTooSmallForGridError
from src.simulation.generator import SimulationConfig, generate_dataset
from src.smoothing.binned import check_bandwidth, estimate_cov_binned, estimate_mean_binned
from src.smoothing.binning import PairBinner, bin_centers, bin_marginal, bin_pairs, locate
from src.smoothing.local_linear import estimate_cov_surface, estimate_mean_curve
from src.smoothing.models import SmootherSpec

BINS = 11


def _zero(u):
    return np.zeros_like(np.asarray(u, dtype=np.float64))


def _on_nodes(seed, n=30, p=2, t=8):
    rng = np.random.default_rng(seed)
    times = bin_centers(BINS)[rng.integers(0, BINS, (n, p, t))]
    values = np.cos(3.0 * times) + rng.normal(0.0, 0.5, times.shape)
    return FunctionalDataset.from_arrays(times, values)


class TestLocate:
    def test_interior_point(self):
        left, delta = locate(np.array([0.25]), 5)

        assert left.tolist() == [1]
        assert delta[0] == pytest.approx(0.0)

    def test_right_endpoint_goes_to_last_interval(self):
        left, delta = locate(np.array([1.0]), 5)

        assert left.tolist() == [3]
        assert delta[0] == pytest.approx(1.0)

    def test_near_node_snaps(self):
        _, delta = locate(np.array([0.3 + 1e-12]), BINS)

        assert delta[0] == 0.0


def test_binning_preserves_mass_and_first_moment():
    data = FunctionalDataset.from_observations([[[(0.13, 2.0), (0.58, -1.0), (0.97, 0.5)]]])

    binned = bin_marginal(data, 0, BINS)

    assert binned.counts.sum() == pytest.approx(3.0)
    assert binned.counts[0] @ binned.centers == pytest.approx(0.13 + 0.58 + 0.97)
    assert binned.sums.sum() == pytest.approx(1.5)


def test_pair_mass_counts_off_diagonal_pairs():
    rng = np.random.default_rng(0)
    times = rng.uniform(0.0, 1.0, (3, 2, 7))
    data = FunctionalDataset.from_arrays(times, np.ones_like(times))

    marginal = bin_pairs(data, 0, 0, BINS, (_zero, _zero))
    cross = bin_pairs(data, 0, 1, BINS, (_zero, _zero))

    for i in range(3):
        assert marginal.pair_mass(i) == pytest.approx(7 * 6)
        assert cross.pair_mass(i) == pytest.approx(7 * 7)


def test_binned_mean_is_exact_on_nodes():
    data = _on_nodes(1)
    grid = bin_centers(BINS)
    spec = SmootherSpec(0.3)

    exact = estimate_mean_curve(data, 0, grid, spec)
    binned = estimate_mean_binned(bin_marginal(data, 0, BINS), None, grid, spec)

    np.testing.assert_allclose(binned.values, exact.values, rtol=0.0, atol=1e-12)


@pytest.mark.parametrize("pair", [(0, 0), (0, 1)])
def test_binned_covariance_is_exact_on_nodes(pair):
    data = _on_nodes(2)
    grid = bin_centers(BINS)
    spec = SmootherSpec(0.3)
    j, k = pair

    exact = estimate_cov_surface(data, j, k, grid, grid, spec, (_zero, _zero))
    binned = estimate_cov_binned(
        bin_pairs(data, j, k, BINS, (_zero, _zero)), None, grid, grid, spec
    )

    assert exact.is_complete and binned.is_complete
    np.testing.assert_allclose(binned.values, exact.values, rtol=0.0, atol=1e-12)


def test_pair_binner_matches_bin_pairs():
    data = _on_nodes(5, p=3)
    means = [_zero, lambda u: 0.5 * np.asarray(u), _zero]
    binner = PairBinner(data, BINS, means)
    weights = np.full(data.n_subjects, 1.0 / data.n_subjects)

    for j, k in [(0, 0), (0, 1), (1, 2), (2, 2)]:
        shared = binner.pairs(j, k)
        direct = bin_pairs(data, j, k, BINS, (means[j], means[k]))
        for got, want in zip(shared.grams(weights), direct.grams(weights)):
            np.testing.assert_array_equal(got, want)
        np.testing.assert_array_equal(shared.pair_counts, direct.pair_counts)


def test_pair_binner_needs_one_curve_per_variable():
    with pytest.raises(ValueError):
        PairBinner(_on_nodes(6), BINS, [_zero])


def test_binned_cost_does_not_grow_with_sample_size():
    grid = bin_centers(BINS)
    spec = SmootherSpec(0.3)
    small = estimate_mean_binned(bin_marginal(_on_nodes(3, n=20), 0, BINS), None, grid, spec)
    large = estimate_mean_binned(bin_marginal(_on_nodes(3, n=200), 0, BINS), None, grid, spec)

    assert small.stats["kernel_evaluations"] == large.stats["kernel_evaluations"]


class TestBandwidthGuard:
    def test_accepts_two_bin_widths(self):
        check_bandwidth(0.2, BINS)

    def test_rejects_narrow_bandwidth(self):
        with pytest.raises(BandwidthTooSmallForGridError):
            check_bandwidth(0.15, BINS)

    def test_estimator_refuses_narrow_bandwidth(self):
        binned = bin_marginal(_on_nodes(4), 0, BINS)

        with pytest.raises(BandwidthTooSmallForGridError):
            estimate_mean_binned(binned, None, bin_centers(BINS), SmootherSpec(0.1))


class TestConvergenceInBins:
    GRID = np.linspace(0.0, 1.0, 21)

    @pytest.fixture(scope="class")
    def simulated(self):
        return generate_dataset(SimulationConfig(n=100, p=1, T=20, seed=11))

    @staticmethod
    def _gap(exact, binned):
        return float(np.max(np.abs(exact - binned)))

    def _mean_gaps(self, data, bins):
        spec = SmootherSpec(0.15)
        exact = estimate_mean_curve(data, 0, self.GRID, spec).values
        gaps = []
        for r in bins:
            binned = estimate_mean_binned(bin_marginal(data, 0, r), None, self.GRID, spec)
            gaps.append(self._gap(exact, binned.values))
        return gaps, float(np.ptp(exact))

    def _cov_gaps(self, data, truth, bins):
        spec = SmootherSpec(0.2)
        means = (truth.mean, truth.mean)
        exact = estimate_cov_surface(data, 0, 0, self.GRID, self.GRID, spec, means).values
        gaps = [
            self._gap(
                exact,
                estimate_cov_binned(
                    bin_pairs(data, 0, 0, r, means), None, self.GRID, self.GRID, spec
                ).values,
            )
            for r in bins
        ]
        return gaps, float(np.ptp(exact))

    def test_mean_gap_shrinks_as_bins_double(self, simulated):
        data, _ = simulated
        gaps, spread = self._mean_gaps(data, [50, 100, 200, 400, 800])

        for coarse, fine in zip(gaps[:3], gaps[1:4]):
            assert fine <= 1.1 * coarse
        assert gaps[-1] <= 1e-3 * spread

    def test_cov_gap_shrinks_as_bins_double(self, simulated):
        data, truth = simulated
        gaps, spread = self._cov_gaps(data, truth, [50, 100, 200, 400, 800])

        for coarse, fine in zip(gaps[:3], gaps[1:4]):
            assert fine <= 1.1 * coarse
        assert gaps[-1] <= 1e-3 * spread
