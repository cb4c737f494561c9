"""Generalized Szasz-Mirakyan (Jain-type) operators and numerical checks of their properties."""

from .errors import (
    ConditionError,
    NondifferentiableError,
    ParameterDomainError,
    TruncationError,
    UnsupportedOrderError,
)
from .kernel import DEFAULT_POLICY, JainParams, TruncationPolicy, WeightTail

__version__ = "0.1.0"
