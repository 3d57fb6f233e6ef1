"""boolflow: Boolean polynomial minimization via quartic-penalty flows.

Minimizes multivariate polynomials over binary (or sign) variables by
relaxing the discrete constraint with a quartic penalty and driving damped
dynamical systems to steady state with three classical time-stepping schemes
(Houbolt, Lie/Marchuk-Yanenko splitting, adaptive Dormand-Prince RK45).
Includes an exhaustive oracle for exact scoring at small sizes, O(eps)
distance certificates, an sklearn-style estimator front end and an
experiment harness with a CLI (``boolflow``).
"""

from .estimators import BooleanPolynomialMinimizer
from .integrators import (
    SCHEMES,
    MultistartError,
    SchemeParams,
    SolveReport,
    SolveStatus,
    Trajectory,
    houbolt_solve,
    lie_solve,
    multistart,
    rk45_integrate,
    rk45_solve,
    rk45_step,
)
from .model import BooleanProblem, PenaltyModel, recover_x, suggest_c, to_pm1
from .oracle import (
    BoundCertificate,
    OracleResult,
    bound_certificate,
    delta,
    errobj,
    exhaustive_min,
    round_to_signs,
    sign_alignment_check,
)
from .polynomial import (
    InstanceSpec,
    Monomial,
    SparsePoly,
    load_instance,
    random_poly,
    save_instance,
)
from .scalar_solvers import (
    HalfStepError,
    MonotoneCubic,
    NewtonConfig,
    solve_coupled,
    solve_cubic,
    solve_cubic_batch,
)

__version__ = "0.1.0"

__all__ = [
    "BooleanPolynomialMinimizer",
    "BooleanProblem",
    "BoundCertificate",
    "HalfStepError",
    "InstanceSpec",
    "Monomial",
    "MonotoneCubic",
    "MultistartError",
    "NewtonConfig",
    "OracleResult",
    "PenaltyModel",
    "SCHEMES",
    "SchemeParams",
    "SolveReport",
    "SolveStatus",
    "SparsePoly",
    "Trajectory",
    "bound_certificate",
    "delta",
    "errobj",
    "exhaustive_min",
    "houbolt_solve",
    "lie_solve",
    "load_instance",
    "multistart",
    "random_poly",
    "recover_x",
    "rk45_integrate",
    "rk45_solve",
    "rk45_step",
    "round_to_signs",
    "save_instance",
    "sign_alignment_check",
    "solve_coupled",
    "solve_cubic",
    "solve_cubic_batch",
    "suggest_c",
    "to_pm1",
]
