"""Extremal solver and exponential trim-turnpike certification.

Optimal control problems with cyclic state variables and fixed
endpoints: solve the two-point boundary value problem of the minimum
principle by multiple shooting, reduce the cyclic symmetry to a
constant multiplier, locate the symmetry-induced trim turnpike as a
steady point of the reduced Hamiltonian field, and certify two-sided
exponential turnpike estimates numerically.
"""

from .drivers import solve_kepler, solve_layered
from .errors import (
    BlowUp,
    DegenerateFit,
    EvaluatorFailure,
    GridTooCoarse,
    LambdaMismatch,
    NewtonStagnation,
    NoConvergence,
    NonSPDWeight,
    PoleProximity,
    RadiusCollapse,
    ShapeMismatch,
    SingularJacobian,
    SingularMatrix,
    SingularShootingJacobian,
    StepFailure,
    TrimTurnpikeError,
    WindowEmpty,
)
from .integrate import Trajectory, integrate_with_sensitivity
from .linalg import Spectrum, cho_solve, cholesky, eigenvalues, lu_solve
from .model import CyclicProblem, Dims
from .pmp import (
    CyclicMultiplier,
    ReducedState,
    endpoint_map,
    fbvp_rhs,
    hamiltonian,
    linearize_reduced,
    optimal_feedback,
    rbvp_rhs,
    reconstruct_cyclic,
    rocp_hamiltonian,
)
from .problems import (
    LqClosedForm,
    kepler_problem,
    lq_exact,
    lq_lambda_approx,
    lq_problem,
    nlq_problem,
)
from .shooting import (
    ExtremalSolution,
    InitialGuess,
    ShootingConfig,
    continuation_in_T,
    solve_bvp,
    turnpike_guess,
)
from .steady import (
    HyperbolicityReport,
    StaticBranch,
    SteadyPoint,
    check_hyperbolicity,
    enumerate_static_branches,
    match_trim_rate,
    solve_static,
    trim_rate,
)
from .turnpike import (
    EnvelopeFit,
    TrimReference,
    TurnpikeCertificate,
    anchor_from_solution,
    build_trim,
    certify,
    fit_envelope,
)

__version__ = "0.1.0"

__all__ = [
    "BlowUp",
    "CyclicMultiplier",
    "CyclicProblem",
    "DegenerateFit",
    "Dims",
    "EnvelopeFit",
    "EvaluatorFailure",
    "ExtremalSolution",
    "GridTooCoarse",
    "HyperbolicityReport",
    "InitialGuess",
    "LambdaMismatch",
    "LqClosedForm",
    "NewtonStagnation",
    "NoConvergence",
    "NonSPDWeight",
    "PoleProximity",
    "RadiusCollapse",
    "ReducedState",
    "ShapeMismatch",
    "ShootingConfig",
    "SingularJacobian",
    "SingularMatrix",
    "SingularShootingJacobian",
    "Spectrum",
    "StaticBranch",
    "SteadyPoint",
    "StepFailure",
    "Trajectory",
    "TrimReference",
    "TrimTurnpikeError",
    "TurnpikeCertificate",
    "WindowEmpty",
    "anchor_from_solution",
    "build_trim",
    "certify",
    "check_hyperbolicity",
    "cho_solve",
    "cholesky",
    "continuation_in_T",
    "eigenvalues",
    "endpoint_map",
    "enumerate_static_branches",
    "fbvp_rhs",
    "fit_envelope",
    "hamiltonian",
    "integrate_with_sensitivity",
    "kepler_problem",
    "linearize_reduced",
    "lq_exact",
    "lq_lambda_approx",
    "lq_problem",
    "lu_solve",
    "match_trim_rate",
    "nlq_problem",
    "optimal_feedback",
    "rbvp_rhs",
    "reconstruct_cyclic",
    "rocp_hamiltonian",
    "solve_bvp",
    "solve_kepler",
    "solve_layered",
    "solve_static",
    "trim_rate",
    "turnpike_guess",
]
