import numpy as np
import pytest

from src.simulation.truth import GroundTruth, true_cov, true_mean, write_truth_csv


def test_mean_at_endpoints():
    assert float(true_mean(0.0)) == pytest.approx(1.5 * np.sin(1.5 * np.pi))
    assert float(true_mean(1.0)) == pytest.approx(1.5 * np.sin(4.5 * np.pi) + 2.0)


def test_marginal_variance_at_zero():
    # only the cosine components are nonzero at u = 0
    assert float(true_cov(0, 0, 0.0, 0.0, 0.5)) == pytest.approx(2.0 * (1 / 4 + 1 / 16))


def test_cross_covariance_decays_with_lag():
    truth = GroundTruth(rho=0.5, n_vars=3)
    grid = np.linspace(0.0, 1.0, 5)

    np.testing.assert_allclose(
        truth.cov_surface(0, 2, grid, grid), 0.25 * truth.cov_surface(1, 1, grid, grid)
    )


def test_surface_is_symmetric():
    grid = np.linspace(0.0, 1.0, 7)
    surface = GroundTruth(rho=0.3, n_vars=2).cov_surface(0, 1, grid, grid)

    np.testing.assert_allclose(surface, surface.T)


def test_latent_curve():
    truth = GroundTruth(rho=0.5, n_vars=1)

    assert float(truth.latent(np.zeros(4), 0.3)) == pytest.approx(float(true_mean(0.3)))


def test_write_truth_csv(tmp_path):
    path = tmp_path / "truth.csv"

    rows = write_truth_csv(
        GroundTruth(rho=0.5, n_vars=2), [0.0, 0.5, 1.0], path, metadata={"seed": 0}
    )

    lines = path.read_text(encoding="utf-8").splitlines()
    assert rows == 3 + 3 * 9
    assert lines[0] == "# seed=0"
    assert lines[1] == "kind,j,k,u,v,value"
    assert len(lines) == rows + 2
