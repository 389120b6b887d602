"""Exception types raised by the library."""


class ChebdynError(Exception):
    """Base class for all library errors."""


class NonConvergence(ChebdynError):
    """Root finder did not reach the residual tolerance within its sweep budget."""


class DegenerateInput(ChebdynError):
    """Input polynomial is zero, constant, linear or a (shifted) monomial."""


class Indeterminate(ChebdynError):
    """Numerator and denominator vanish together at an evaluation point."""


class AmbiguousClassification(ChebdynError):
    """A discrete count depends on a value inside the numerical uncertainty band."""


class ForbiddenLambda(ChebdynError):
    """Multiplier parameter is 5 or 6, where the cubic family is undefined."""
