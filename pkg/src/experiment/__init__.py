# Public API re-exports
from .config import ExperimentConfig, load_config  # noqa: F401
from .phase import run_phase_experiment, write_phase_outputs  # noqa: F401
from .rate_study import run_rate_experiment, write_rate_outputs  # noqa: F401
from .result_store import ThreadSafeResultStore  # noqa: F401
from .seeds import cell_seed  # noqa: F401
