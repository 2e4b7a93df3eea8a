import numpy as np
import pytest

from src.data.dataset import FunctionalDataset
from src.data.weights import WeightScheme
from src.exceptions import SingularSystemError
from src.smoothing.local_linear import (
    PairSet,
    estimate_cov_at,
    estimate_cov_surface,
    estimate_mean_at,
    estimate_mean_curve,
    raw_covariances,
    smooth_pairs,
)
from src.smoothing.models import SmootherSpec


def _zero(u):
    return np.zeros_like(np.asarray(u, dtype=np.float64))


def _affine_dataset(rng, n=20, t=15):
    times = rng.uniform(0.0, 1.0, (n, 1, t))
    return FunctionalDataset.from_arrays(times, 1.5 - 2.0 * times)


@pytest.mark.parametrize("scheme", list(WeightScheme))
def test_mean_reproduces_affine_data(scheme):
    data = _affine_dataset(np.random.default_rng(1))
    grid = np.linspace(0.0, 1.0, 21)

    curve = estimate_mean_curve(data, 0, grid, SmootherSpec(0.3, scheme=scheme))

    assert curve.is_complete
    np.testing.assert_allclose(curve.values, 1.5 - 2.0 * grid, atol=1e-10)


def test_mean_at_matches_curve():
    data = _affine_dataset(np.random.default_rng(2))
    spec = SmootherSpec(0.2)

    curve = estimate_mean_curve(data, 0, [0.25, 0.75], spec)

    assert estimate_mean_at(data, 0, 0.75, spec) == pytest.approx(curve.values[1])


def test_mean_at_matches_weighted_least_squares():
    rng = np.random.default_rng(3)
    times = rng.uniform(0.0, 1.0, (6, 1, 5))
    values = np.sin(4.0 * times) + rng.normal(0.0, 0.1, times.shape)
    data = FunctionalDataset.from_arrays(times, values)
    u, h = 0.4, 0.35

    # per-observation weights are constant, so they drop out of the fit
    d = (times.ravel() - u) / h
    k = np.where(np.abs(d) <= 1.0, 0.75 * (1.0 - d * d), 0.0)
    design = np.column_stack([np.ones_like(d), times.ravel() - u]) * np.sqrt(k)[:, None]
    coef, *_ = np.linalg.lstsq(design, values.ravel() * np.sqrt(k), rcond=None)

    assert estimate_mean_at(data, 0, u, SmootherSpec(h)) == pytest.approx(coef[0], rel=1e-9)


def test_empty_window_is_recorded_as_failure():
    data = FunctionalDataset.from_observations([[[(0.1, 1.0), (0.2, 2.0)]]])

    curve = estimate_mean_curve(data, 0, [0.15, 0.9], SmootherSpec(0.1))

    assert curve.failures == (1,)
    assert np.isfinite(curve.values[0])


def test_mean_at_raises_when_singular():
    data = FunctionalDataset.from_observations([[[(0.1, 1.0), (0.2, 2.0)]]])

    with pytest.raises(SingularSystemError):
        estimate_mean_at(data, 0, 0.9, SmootherSpec(0.1))


class TestRawCovariances:
    def test_marginal_pairs_exclude_same_point(self):
        data = FunctionalDataset.from_observations([[[(0.1, 1.0), (0.5, 2.0), (0.9, 3.0)]]])

        raw = raw_covariances(data, 0, 0, _zero, _zero, 0)

        assert len(raw) == 6
        assert all(u != v for u, v, _ in raw.triples())

    def test_cross_pairs_use_every_combination(self):
        data = FunctionalDataset.from_observations(
            [[[(0.1, 1.0), (0.5, 2.0)], [(0.3, 4.0), (0.6, 5.0), (0.8, 6.0)]]]
        )

        raw = raw_covariances(data, 0, 1, _zero, _zero, 0)

        assert len(raw) == 6
        assert raw.triples()[0] == (0.1, 0.3, 4.0)

    def test_centering_is_applied(self):
        data = FunctionalDataset.from_observations([[[(0.2, 3.0), (0.4, 5.0)]]])

        raw = raw_covariances(data, 0, 0, lambda u: u * 0 + 1.0, lambda u: u * 0 + 1.0, 0)

        np.testing.assert_allclose(sorted(raw.theta), [8.0, 8.0])


def test_pair_smoother_reproduces_planes():
    rng = np.random.default_rng(4)
    u, v = rng.uniform(0.0, 1.0, (2, 1000))
    pairs = PairSet.from_triples(u, v, 0.5 + u - 2.0 * v, np.ones(1000))
    grid = np.linspace(0.0, 1.0, 11)

    surface = smooth_pairs(pairs, grid, grid, SmootherSpec(0.3))

    uu, vv = np.meshgrid(grid, grid, indexing="ij")
    assert surface.is_complete
    np.testing.assert_allclose(surface.values, 0.5 + uu - 2.0 * vv, atol=1e-10)


def _noisy_dataset(seed, n=40, p=2, t=6):
    rng = np.random.default_rng(seed)
    times = rng.uniform(0.0, 1.0, (n, p, t))
    return FunctionalDataset.from_arrays(times, rng.normal(0.0, 1.0, times.shape))


def test_marginal_surface_is_symmetric():
    data = _noisy_dataset(5)
    grid = np.linspace(0.0, 1.0, 9)

    surface = estimate_cov_surface(data, 0, 0, grid, grid, SmootherSpec(0.3), (_zero, _zero))

    np.testing.assert_allclose(surface.values, surface.values.T, atol=1e-12)


def test_cross_surface_transposes_with_pair_order():
    data = _noisy_dataset(6)
    grid = np.linspace(0.0, 1.0, 7)
    spec = SmootherSpec(0.35)

    forward = estimate_cov_surface(data, 0, 1, grid, grid, spec, (_zero, _zero))
    backward = estimate_cov_surface(data, 1, 0, grid, grid, spec, (_zero, _zero))

    np.testing.assert_allclose(forward.values, backward.values.T, atol=1e-10)


def test_cov_at_matches_surface_cell():
    data = _noisy_dataset(7)
    spec = SmootherSpec(0.35)

    surface = estimate_cov_surface(data, 0, 1, [0.3], [0.6], spec, (_zero, _zero))

    assert estimate_cov_at(data, 0, 1, 0.3, 0.6, spec, (_zero, _zero)) == pytest.approx(
        surface.values[0, 0]
    )


class TestPermutationInvariance:
    GRID = np.linspace(0.0, 1.0, 11)
    PAIRS = [(0, 0), (0, 1), (1, 1)]

    @staticmethod
    def _observations(seed, n=25, p=2, t=6):
        rng = np.random.default_rng(seed)
        return [
            [
                list(zip(rng.uniform(0.0, 1.0, t).tolist(), rng.normal(size=t).tolist()))
                for _ in range(p)
            ]
            for _ in range(n)
        ]

    def _estimates(self, data, scheme):
        spec = SmootherSpec(0.3, scheme=scheme)
        means = [estimate_mean_curve(data, j, self.GRID, spec) for j in range(data.n_vars)]
        surfaces = [
            estimate_cov_surface(data, j, k, self.GRID, self.GRID, spec, (means[j], means[k]))
            for j, k in self.PAIRS
        ]
        return [m.values for m in means] + [s.values for s in surfaces]

    @pytest.mark.parametrize("scheme", list(WeightScheme))
    def test_shuffled_subjects_give_identical_estimates(self, scheme):
        data = FunctionalDataset.from_observations(self._observations(7))
        order = np.random.default_rng(8).permutation(data.n_subjects)

        original = self._estimates(data, scheme)
        shuffled = self._estimates(data.permuted(order.tolist()), scheme)

        for before, after in zip(original, shuffled):
            assert np.all(np.isfinite(before))
            np.testing.assert_array_equal(after, before)

    def test_shuffled_observation_order_gives_identical_estimates(self):
        obs = self._observations(9)
        rng = np.random.default_rng(10)
        reordered = [
            [[pairs[t] for t in rng.permutation(len(pairs))] for pairs in subject]
            for subject in obs
        ]

        original = self._estimates(FunctionalDataset.from_observations(obs), "per-obs")
        shuffled = self._estimates(FunctionalDataset.from_observations(reordered), "per-obs")

        for before, after in zip(original, shuffled):
            np.testing.assert_array_equal(after, before)
