from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pytest

from src.evaluation.mise import mise_cov
from src.evaluation.report import CellStatus
from src.evaluation.sweep import (
    Centering,
    SweepSettings,
    bandwidth_sweep_cov,
    bandwidth_sweep_mean,
    default_bandwidth_grid,
    run_sweeps,
)
from src.simulation.generator import SimulationConfig, generate_dataset
from src.smoothing.binned import estimate_cov_binned
from src.smoothing.binning import bin_centers, bin_pairs
from src.smoothing.models import SmootherSpec


@pytest.fixture(scope="module")
def simulated():
    return generate_dataset(SimulationConfig(n=30, p=2, T=10, seed=5))


def test_default_grid_is_geometric():
    grid = default_bandwidth_grid(0.02, 0.5, 15)

    assert grid[0] == pytest.approx(0.02) and grid[-1] == pytest.approx(0.5)
    assert np.allclose(grid[1:] / grid[:-1], grid[1] / grid[0])


def test_default_grid_rejects_bad_range():
    with pytest.raises(ValueError):
        default_bandwidth_grid(0.5, 0.1, 3)


def test_exact_sweep_fills_every_cell(simulated):
    data, truth = simulated
    grid = np.linspace(0.0, 1.0, 21)

    report = run_sweeps(data, truth, [0.4, 0.2, 0.2], [0.3, 0.5], grid, centering="true")

    np.testing.assert_array_equal(report.bandwidths_mean, [0.2, 0.4])
    assert report.failed_count == 0
    assert np.all(report.mise_mean > 0)
    np.testing.assert_array_equal(report.mise_cov[0, 1], report.mise_cov[1, 0])


def test_executor_does_not_change_results(simulated):
    data, truth = simulated
    grid = np.linspace(0.0, 1.0, 21)

    serial = run_sweeps(data, truth, [0.2, 0.4], [0.3], grid)
    with ThreadPoolExecutor(max_workers=3) as pool:
        threaded = run_sweeps(data, truth, [0.2, 0.4], [0.3], grid, executor=pool)

    np.testing.assert_array_equal(serial.mise_mean, threaded.mise_mean)
    np.testing.assert_array_equal(serial.mise_cov, threaded.mise_cov)


def test_binned_sweep_marks_narrow_bandwidths(simulated):
    data, truth = simulated
    settings = SweepSettings(binned=True, bin_count=30)

    report = bandwidth_sweep_mean(data, truth, [0.05, 0.3], bin_centers(30), settings)

    assert report.status_mean[:, 0].tolist() == [CellStatus.TOO_SMALL.value] * 2
    assert report.status_mean[:, 1].tolist() == [CellStatus.OK.value] * 2
    assert report.binned


def test_estimated_centering_needs_a_mean_report(simulated):
    from src.evaluation.sweep import centering_means

    data, truth = simulated

    with pytest.raises(ValueError):
        centering_means(data, truth, None, [0.0, 1.0], centering=Centering.ESTIMATED)


def test_binned_cov_sweep_matches_direct_estimates(simulated):
    data, truth = simulated
    grid = bin_centers(30)
    settings = SweepSettings(binned=True, bin_count=30)
    means = [truth.mean, truth.mean]

    report = bandwidth_sweep_cov(data, truth, [0.2, 0.4], grid, means, settings)

    for j, k in [(0, 0), (0, 1)]:
        binned = bin_pairs(data, j, k, 30, (truth.mean, truth.mean))
        for c, h in enumerate([0.2, 0.4]):
            surface = estimate_cov_binned(binned, None, grid, grid, SmootherSpec(h))
            expected = mise_cov(surface, lambda u, v, j=j, k=k: truth.cov(j, k, u, v))
            assert report.mise_cov[j, k, c] == expected
            assert report.mise_cov[k, j, c] == expected
