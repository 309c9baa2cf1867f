"""Numerical laboratory for Halpern-type anchored iterations of two mappings."""

from .errors import (
    ConfigurationError,
    ContractViolation,
    InvalidSetError,
    NumericFailure,
    PreconditionError,
    SamplingFailure,
    UsageError,
)
from .hilbert import as_vector, combine, convexity_identity_residual, inner, norm
from .sets import ConvexSetSpec
from .operators import OperatorSpec, apply, convex_combine_op
from .schedules import Schedule, validate_regime
from .oracle import OracleResult, dykstra_project, variational_inequality_check
from .iterations import IterationConfig, Trace, run_iteration

__version__ = "0.1.0"

__all__ = [
    "ConfigurationError",
    "ContractViolation",
    "ConvexSetSpec",
    "InvalidSetError",
    "IterationConfig",
    "NumericFailure",
    "OperatorSpec",
    "OracleResult",
    "PreconditionError",
    "SamplingFailure",
    "Schedule",
    "Trace",
    "UsageError",
    "apply",
    "as_vector",
    "combine",
    "convex_combine_op",
    "convexity_identity_residual",
    "dykstra_project",
    "inner",
    "norm",
    "run_iteration",
    "validate_regime",
    "variational_inequality_check",
]
