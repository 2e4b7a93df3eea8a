import numpy as np
import pytest

from src.data.dataset import FunctionalDataset
from src.data.weights import (
    WeightScheme,
    cov_weights,
    mean_weights,
    pair_counts,
    resolve_mean_weights,
    scheme_weights,
)
from src.exceptions import AllEmptyError, NoPairsError
from src.smoothing.local_linear import estimate_cov_surface, estimate_mean_curve
from src.smoothing.models import SmootherSpec


def _make_dataset(counts) -> FunctionalDataset:
    """Dataset whose subject ``i`` has ``counts[i][j]`` points for variable ``j``."""
    obs = [
        [[(float(t + 1) / (c + 1), 0.0) for t in range(c)] for c in row] for row in counts
    ]
    return FunctionalDataset.from_observations(obs)


def test_per_observation_mean_weights():
    data = _make_dataset([[2], [0], [3]])

    np.testing.assert_allclose(mean_weights(data, 0, WeightScheme.PER_OBSERVATION), [0.2, 0, 0.2])


def test_per_subject_mean_weights_skip_empty_subjects():
    data = _make_dataset([[2], [0], [3]])

    v = mean_weights(data, 0, WeightScheme.PER_SUBJECT)

    np.testing.assert_allclose(v, [0.25, 0.0, 1.0 / 6.0])


def test_pair_counts_exclude_same_point_pairs():
    data = _make_dataset([[3, 2], [1, 4]])

    np.testing.assert_array_equal(pair_counts(data, 0, 0), [6, 0])
    np.testing.assert_array_equal(pair_counts(data, 0, 1), [6, 4])


@pytest.mark.parametrize("scheme", list(WeightScheme))
def test_normalization_on_ragged_designs(scheme):
    rng = np.random.default_rng(7)
    for _ in range(50):
        counts = rng.integers(0, 6, size=(int(rng.integers(2, 12)), 2))
        counts[0] = [2, 2]
        data = _make_dataset(counts.tolist())
        for j in range(2):
            v = mean_weights(data, j, scheme)
            assert abs(counts[:, j] @ v - 1.0) < 1e-12
        for j, k in ((0, 0), (0, 1), (1, 1)):
            w = cov_weights(data, j, k, scheme)
            assert abs(pair_counts(data, j, k) @ w - 1.0) < 1e-12


def test_all_empty_variable_raises():
    data = _make_dataset([[0, 1], [0, 2]])

    with pytest.raises(AllEmptyError):
        mean_weights(data, 0, WeightScheme.PER_OBSERVATION)


def test_no_pairs_raises():
    data = _make_dataset([[1], [1]])

    with pytest.raises(NoPairsError):
        cov_weights(data, 0, 0, WeightScheme.PER_SUBJECT)


def test_scheme_weights_accepts_units_directly():
    weights = scheme_weights(np.array([4, 0]), WeightScheme.PER_SUBJECT)

    np.testing.assert_allclose(weights, [0.25, 0.0])


class TestExplicitWeights:
    def test_vector_passes_through(self):
        data = _make_dataset([[1], [2]])

        np.testing.assert_array_equal(resolve_mean_weights(data, 0, [1.0, 3.0]), [1.0, 3.0])

    def test_wrong_length(self):
        with pytest.raises(ValueError):
            resolve_mean_weights(_make_dataset([[1], [2]]), 0, [1.0])

    def test_negative_entries(self):
        with pytest.raises(ValueError):
            resolve_mean_weights(_make_dataset([[1], [2]]), 0, [1.0, -1.0])


class TestSchemesCoincideForEqualCounts:
    def test_weight_vectors_are_identical(self):
        data = _make_dataset([[4, 4], [4, 4], [4, 4], [4, 4]])

        for j in range(2):
            np.testing.assert_array_equal(
                mean_weights(data, j, WeightScheme.PER_OBSERVATION),
                mean_weights(data, j, WeightScheme.PER_SUBJECT),
            )
        for j, k in [(0, 0), (0, 1), (1, 1)]:
            np.testing.assert_array_equal(
                cov_weights(data, j, k, WeightScheme.PER_OBSERVATION),
                cov_weights(data, j, k, WeightScheme.PER_SUBJECT),
            )

    def test_estimates_coincide(self):
        rng = np.random.default_rng(12)
        times = rng.uniform(0.0, 1.0, (30, 2, 5))
        values = np.sin(4.0 * times) + rng.normal(size=times.shape)
        data = FunctionalDataset.from_arrays(times, values)
        grid = np.linspace(0.0, 1.0, 11)
        estimates = {}
        for scheme in WeightScheme:
            spec = SmootherSpec(0.3, scheme=scheme)
            mean = estimate_mean_curve(data, 0, grid, spec)
            cov = estimate_cov_surface(data, 0, 1, grid, grid, spec, (mean, mean))
            estimates[scheme] = (mean.values, cov.values)

        per_obs = estimates[WeightScheme.PER_OBSERVATION]
        per_subject = estimates[WeightScheme.PER_SUBJECT]
        for a, b in zip(per_obs, per_subject):
            np.testing.assert_allclose(a, b, rtol=0.0, atol=1e-12)
