"""Stratification-aware sensitivity analysis for regularized least squares.

Proximal solvers (Forward-Backward, Douglas-Rachford) for
``min_x R(x) + ||y - phi x||^2 / (2 lam)`` with l1, group l1-l2 and nuclear
norm regularizers, discrete descriptors of the strata visited by solutions
and iterates, minimum-norm dual certificates bounding the complexity of
perturbed solutions, and the Monte Carlo experiments built on top of them.
"""

__version__ = "0.1.0"

from .linalg import (  # noqa: E402
    CholeskyFactor,
    FactorizationError,
    NumericalBreakdownError,
    gaussian_matrix,
    rng_from_seed,
    solve_spd,
    spectral_norm_sq,
    svd,
)
from .regularizers import DEFAULT_TOL, L1, GroupL12, InfeasibleDualError, LInfBall, Nuclear, Regularizer, Tolerances  # noqa: E402
from .strata import (  # noqa: E402
    BlockSaturation,
    BlockSupport,
    InconsistentCertificateError,
    Rank,
    SaturationCount,
    SaturationPattern,
    SignPattern,
    delta_star,
    dim,
    format_stratum,
    geq,
    leq,
    parse_stratum,
    sandwich_holds,
)
from .solvers import (  # noqa: E402
    ProblemInstance,
    SolverBudgetError,
    SolverParams,
    SolverTrace,
    dr_solve,
    duality_gap,
    fb_solve,
    objective,
    reference_solve,
)
from .certificates import Certificate, CertificateError, min_norm_certificate, uniqueness_check  # noqa: E402
from .experiments import (  # noqa: E402
    ExperimentConfig,
    ExperimentResult,
    gen_instance,
    lambda_select,
    projection_demo,
    run_histogram,
    run_iteration_path,
    run_phase_transition,
    write_outputs,
)
