# Public API re-exports
from .dataset import FunctionalDataset  # noqa: F401
from .io import read_long_csv, write_long_csv  # noqa: F401
from .weights import WeightScheme, cov_weights, mean_weights  # noqa: F401
