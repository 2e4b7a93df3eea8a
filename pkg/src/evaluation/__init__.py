# Public API re-exports
from .aggregate import MiseAggregates, aggregate_mises, global_opt_bruteforce  # noqa: F401
from .mise import Quadrature, mise_cov, mise_mean  # noqa: F401
from .rates import (  # noqa: F401
    RateDiagnostics,
    Regime,
    fit_rate_slope,
    optimal_bandwidth,
    rate_diagnostics,
    regime_threshold,
)
from .report import CellStatus, MiseReport, Target, write_mise_report  # noqa: F401
from .sweep import (  # noqa: F401
    Centering,
    SweepSettings,
    bandwidth_sweep_cov,
    bandwidth_sweep_mean,
    default_bandwidth_grid,
    run_sweeps,
)
