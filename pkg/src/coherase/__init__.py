"""Numerical laboratory for the noise cost of erasing quantum coherence."""

__version__ = "0.1.0"

from .errors import (  # noqa: F401
    CoheraseError,
    DimensionMismatch,
    DimensionOverflow,
    InvalidState,
    NotHermitian,
    NumericalFailure,
    ParamOutOfRange,
    ValidationError,
)
