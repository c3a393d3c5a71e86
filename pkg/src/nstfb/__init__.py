"""Sparse recovery by null-space tuning, hard thresholding and functional feedback."""

__version__ = "0.1.0"

from .linalg import (  # noqa: E402
    NullSpaceTuner,
    RankDeficientError,
    SingularSystemError,
    min_norm_feasible,
    null_space_projector,
    precondition,
    restricted_ls,
    spectral_norm,
)
from .schedules import Schedule, constant, custom, linear, parse_schedule, quadratic  # noqa: E402
from .solvers import (  # noqa: E402
    SolveResult,
    SolverConfig,
    Status,
    adpt_nst_ht_fb,
    convergence_certificate,
    feedback,
    ghtp,
    gomp,
    htp,
    iht,
    nst_ht_fb,
    omp,
)
from .support import complement, sym_diff, top_k  # noqa: E402
from .estimators import (  # noqa: E402
    AdaptiveNSTRegressor,
    GHTPRegressor,
    GOMPRegressor,
    HTPRegressor,
    IHTRegressor,
    NSTRegressor,
    OMPRegressor,
)

__all__ = [
    "__version__",
    "NullSpaceTuner",
    "RankDeficientError",
    "SingularSystemError",
    "min_norm_feasible",
    "null_space_projector",
    "precondition",
    "restricted_ls",
    "spectral_norm",
    "Schedule",
    "constant",
    "custom",
    "linear",
    "parse_schedule",
    "quadratic",
    "SolveResult",
    "SolverConfig",
    "Status",
    "adpt_nst_ht_fb",
    "convergence_certificate",
    "feedback",
    "ghtp",
    "gomp",
    "htp",
    "iht",
    "nst_ht_fb",
    "omp",
    "complement",
    "sym_diff",
    "top_k",
    "AdaptiveNSTRegressor",
    "GHTPRegressor",
    "GOMPRegressor",
    "HTPRegressor",
    "IHTRegressor",
    "NSTRegressor",
    "OMPRegressor",
]
