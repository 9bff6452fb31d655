"""Exception hierarchy shared by all toplink modules."""


class ToplinkError(Exception):
    """Base class for all library errors."""


class DomainError(ToplinkError, ValueError):
    """Argument outside the domain of a function (e.g. Im(tau) <= 0)."""


class EvaluationError(ToplinkError, ArithmeticError):
    """An iteration or series failed to converge under its cap."""

    def __init__(self, message, *, argument=None):
        super().__init__(message)
        self.argument = argument


class PoleError(ToplinkError, ArithmeticError):
    """Evaluation point sits on (or numerically too close to) a pole or zero denominator."""

    def __init__(self, message, *, nearest_pole=None, denominator=None):
        super().__init__(message)
        self.nearest_pole = nearest_pole
        self.denominator = denominator


class InvalidTransformError(ToplinkError, ValueError):
    """Matrix is not a proper complex orthogonal transformation."""


class AmbiguousClassificationError(ToplinkError):
    """Rank signature of a quadratic form is inside the tolerance margin."""

    def __init__(self, message, candidates):
        super().__init__(message)
        self.candidates = tuple(candidates)


class IsotropicBreakdownError(ToplinkError):
    """Complex Gram-Schmidt met an (almost) isotropic vector."""
