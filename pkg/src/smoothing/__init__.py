# Public API re-exports
from .binned import estimate_cov_binned, estimate_mean_binned  # noqa: F401
from .binning import (  # noqa: F401
    BinnedMarginal,
    BinnedPairs,
    PairBinner,
    bin_marginal,
    bin_pairs,
)
from .kernels import Kernel, kernel_eval  # noqa: F401
from .local_linear import (  # noqa: F401
    RawCovariances,
    estimate_cov_at,
    estimate_cov_surface,
    estimate_cov_surfaces,
    estimate_mean_at,
    estimate_mean_curve,
    estimate_mean_curves,
    raw_covariances,
)
from .models import CurveEstimate, SmootherSpec, SurfaceEstimate  # noqa: F401
