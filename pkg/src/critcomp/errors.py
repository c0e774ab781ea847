"""Typed errors shared by all modules, with CLI exit codes."""


class CritcompError(Exception):
    exit_code = 1


class ValidationError(CritcompError, ValueError):
    """Bad input: malformed descriptor, violated precondition, unsupported case."""

    exit_code = 2


class PreconditionError(ValidationError):
    """An operation was called outside its documented domain."""


class NotInvertibleError(PreconditionError):
    """Constant term is not a unit of the coefficient ring."""


class UnsupportedSchemeError(ValidationError):
    """A scheme or parameter triple outside the supported regimes."""


class EmptySizeClassError(ValidationError):
    """Requested size n has f_n = 0, so no probability space exists."""


class NonConvergenceError(CritcompError, ArithmeticError):
    """A series evaluation did not meet its tolerance."""

    exit_code = 3
