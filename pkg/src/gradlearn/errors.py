"""Exception types shared across the package.

The CLI maps each class onto an exit code, so library code should raise
one of these rather than a bare ``ValueError`` when the failure category
matters to a caller.
"""


class GradLearnError(Exception):
    """Base class for package errors."""


class DataFormatError(GradLearnError, ValueError):
    """Input file or array does not have the expected layout."""


class DegenerateDataError(GradLearnError, ValueError):
    """Data admit no sensible bandwidth (e.g. all points coincide)."""


class NumericalError(GradLearnError, ArithmeticError):
    """A factorization or linear solve failed after stabilization."""
