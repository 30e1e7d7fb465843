"""High-precision computation and identity verification for orthogonal
polynomials with the singularly perturbed Laguerre weight
w(x; t, alpha) = x^alpha exp(-x - t/x) on (0, oo), t >= 0, alpha > -1.

Everything is certified by adaptive-precision two-level agreement: moments,
Hankel determinants, recurrence coefficients, polynomial zeros, the ladder
identities, the discrete and Toda-type systems, the Painleve III' equation
and its sigma-form, and the large-n / long-time asymptotic expansions.
"""

__version__ = "0.1.0"

from .errors import (
    CrossCheckMismatch,
    DivisionHazard,
    DomainError,
    EigenNonConvergence,
    IllConditionedFit,
    InsufficientZeros,
    IoError,
    NonConvergence,
    OplabError,
    PrecisionExhausted,
    PropertyViolation,
    RemainderBelowNoise,
    RootBracketFailure,
    SingularAtZero,
    StepUnderflow,
    UsageError,
)
from .numerics import (
    CertifiedReal,
    PrecisionPolicy,
    adaptive_eval,
    adaptive_eval_seq,
    de_quadrature,
    t_derivative,
)
from .moments import MomentTable, WeightParams, bessel_k, moment, moment_table
from .hankel import HankelValue, hankel_det, hankel_value, norm_constant, pn_zero_ratio
from .recurrence import (
    RecurrenceTable,
    aux_integral_check,
    cached_table,
    log_hankel_deriv,
    recurrence_table,
)
from .polynomials import (
    LadderPair,
    PotentialData,
    ZeroPropertyReport,
    ZeroSet,
    eval_polynomial,
    mixed_recurrence_data,
    ode_residual,
    spacing_check,
    structural_residuals,
    sturm_F,
    zero_properties,
    zeros,
)
from .identities import (
    VerificationReport,
    painleve3_parameters,
    run_suite,
    sigma_parameters,
    verify_discrete_system,
    verify_painleve3,
    verify_s_relations,
    verify_sigma_form,
    verify_structural,
    verify_toda,
    verify_zero_theorems,
)
from .asymptotics import (
    ConstantFit,
    EndpointData,
    ExpansionResult,
    SlopeFit,
    endpoints,
    exact_lnD,
    exact_quantity,
    fit_constants,
    large_n,
    long_time,
    remainder_slope,
)

__all__ = [name for name in dir() if not name.startswith("_")]
