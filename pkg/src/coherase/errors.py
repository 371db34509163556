"""Exception hierarchy shared by every module."""


class CoheraseError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(CoheraseError, ValueError):
    """Input failed a precondition check."""


class NotHermitian(ValidationError):
    pass


class InvalidState(ValidationError):
    pass


class DimensionMismatch(ValidationError):
    pass


class ParamOutOfRange(ValidationError):
    pass


class ZeroProbabilitySymbol(ValidationError):
    pass


class NotAMeasurementOperator(ValidationError):
    pass


class NotIncoherentOutput(ValidationError):
    pass


class NotIncoherentEnsemble(ValidationError):
    pass


class MalformedDocument(ValidationError):
    pass


class DimensionOverflow(CoheraseError):
    """A requested construction would exceed the configured dimension cap."""


class TooLarge(DimensionOverflow):
    """Exhaustive enumeration requested over too many sequences."""


class NumericalFailure(CoheraseError, ArithmeticError):
    """An eigensolver failed, or a checked inequality was violated numerically."""
