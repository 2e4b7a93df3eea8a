# Public API re-exports
from .generator import SimulationConfig, generate_dataset, generate_scores  # noqa: F401
from .truth import GroundTruth, fourier_basis, true_cov, true_mean, write_truth_csv  # noqa: F401
