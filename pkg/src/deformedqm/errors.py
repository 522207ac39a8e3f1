"""Exception hierarchy shared by every module."""


class DeformedQMError(Exception):
    """Base class for all errors raised by the package."""


class DomainError(DeformedQMError, ValueError):
    """Argument lies outside the domain of a function (e.g. |P| >= a)."""


class PreconditionError(DeformedQMError, ValueError):
    """A documented precondition of an operation does not hold."""


class QuadratureError(DeformedQMError, ArithmeticError):
    """Quadrature failed to converge or hit a non-finite integrand value."""


class RootFindingError(DeformedQMError, ArithmeticError):
    """Root solve failed (no bracket, NaN, or iteration budget exhausted)."""


class BracketError(RootFindingError):
    """Bracket expansion did not find a sign change."""


class BoundaryConditionError(DeformedQMError, ValueError):
    """Grid function violates the boundary condition of an extension."""


class FitError(DeformedQMError, ArithmeticError):
    """Scaling fit is ill-conditioned or the data has inconsistent signs."""
