"""Exception hierarchy shared across the package.

The split mirrors what callers need to distinguish: bad arguments
(ParameterError), inputs outside a supported regime (PreconditionError),
and genuine numerical failures (NumericalError and friends). The CLI maps
these onto exit codes 2, 4 and 3 respectively.
"""


class ConespecError(Exception):
    """Base class for all package errors."""


class ParameterError(ConespecError, ValueError):
    """An argument is malformed or outside its admissible set."""


class PoleError(ParameterError):
    """Evaluation requested exactly at a pole (e.g. gamma at 0, -1, -2, ...)."""


class VariantError(ParameterError):
    """Operation invoked with the wrong perturbation variant."""


class PreconditionError(ConespecError):
    """Input is valid but outside the regime the operation supports."""


class NumericalError(ConespecError):
    """A numerical procedure failed to deliver its contract."""


class ConvergenceError(NumericalError):
    """A series or iteration exceeded its term/iteration budget."""


class BracketingError(NumericalError):
    """Root bracketing failed (no sign change, or scan exhausted)."""


class BranchJumpError(NumericalError):
    """Eigenvalue continuation found zero or several roots in its window."""


class InconclusiveError(NumericalError):
    """A numerical classification could not be decided within noise."""


class PrecisionWarning(UserWarning):
    """Result may carry reduced precision (e.g. near-integer Bessel order)."""
