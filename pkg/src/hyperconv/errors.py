"""Exception hierarchy shared by every module."""


class HyperconvError(Exception):
    """Base class for all package errors."""


class DomainError(HyperconvError, ValueError):
    """An argument lies outside the domain where the operation is defined."""


class StructureError(HyperconvError, ValueError):
    """A form or sweep description is malformed (wrong lengths, unknown family...)."""


class AccuracyError(HyperconvError, ArithmeticError):
    """Adaptive refinement exhausted its budget before reaching the tolerance.

    This is a numerical failure and is distinct from genuine divergence, which
    is reported as ``math.inf``.
    """


class NumericalError(HyperconvError, ArithmeticError):
    """A computation produced NaN where a finite value or +inf was expected."""
