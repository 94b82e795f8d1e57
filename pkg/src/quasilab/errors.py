"""Exception hierarchy shared by all modules."""


class QuasilabError(Exception):
    """Base class for every error raised by the package."""


class InvalidInput(QuasilabError, ValueError):
    pass


class DomainError(InvalidInput):
    """Argument outside the domain of a descriptor (e.g. t > eps)."""


class UnsupportedRegime(InvalidInput):
    """Raised for n <= p: every non-negative supersolution is constant there."""


class MonotonicityViolation(InvalidInput):
    pass


class NonConvergence(QuasilabError, ArithmeticError):
    """Adaptive quadrature exhausted its budget.

    ``value`` and ``error`` carry the best estimate reached.
    """

    def __init__(self, message, value=float("nan"), error=float("inf")):
        super().__init__(message)
        self.value = value
        self.error = error


class NonFinite(QuasilabError, ArithmeticError):
    pass


class ZeroSamples(QuasilabError, ValueError):
    pass


class DivergentMass(QuasilabError, ArithmeticError):
    pass


class DivergentMoment(DivergentMass):
    pass


class DivergentNorm(QuasilabError, ArithmeticError):
    pass


class CriterionDiverges(QuasilabError):
    """Construction refused: the critical integral diverges."""


class CriterionInconclusive(CriterionDiverges):
    """Construction refused: the critical integral could not be classified."""


class SearchExhausted(QuasilabError):
    pass


class GridTooCoarse(QuasilabError, ValueError):
    pass


class MeshInvalid(InvalidInput):
    pass


class NoConvergence(QuasilabError, ArithmeticError):
    """Nonlinear solver failure; ``trace`` holds the iteration history."""

    def __init__(self, message, trace=()):
        super().__init__(message)
        self.trace = list(trace)


class LineSearchStall(NoConvergence):
    pass


class LambdaOutOfRange(InvalidInput):
    pass
