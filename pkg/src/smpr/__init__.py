"""Stationary Markov processes with polynomial regression.

Build processes from correlation indices and an orthogonal family, compute
structural matrices, martingale polynomials, kernel expansions and harness
classifications, and check conditional-moment identities exactly or by
seeded Monte Carlo.
"""

from .errors import (
    InsufficientPaths,
    InvalidSpec,
    NonDiagonalizableOrDegenerate,
    NonPositiveDefiniteMoments,
    RecurrenceLengthError,
    SMPRError,
    UnboundedSupportError,
)
from .polycore import (
    MomentSequence,
    PolynomialCoefficients,
    ThreeTermRecurrence,
    family_from_recurrence,
    gauss_quadrature,
    hermite_recurrence,
    moments_to_recurrence,
    q_hermite_recurrence,
    recurrence_to_moments,
    shifted_laguerre_recurrence,
)
from .process_spec import CorrelationIndices, ProcessSpec, Support
from .processes import (
    Trajectory,
    finite_chain_spec,
    mehler_kernel,
    ou_spec,
    q_mehler_series,
    q_ou_spec,
    simulate,
    spec_from_dict,
    transition_sample,
    two_point_spec,
)
from .structural import (
    build_generator,
    build_structural,
    discrete_power,
    martingale_polynomials,
    semigroup_check,
    triangular_eigendecompose,
)

__version__ = "0.1.0"
