"""Coulomb problem in deformed Heisenberg algebras with a minimal length.

Deformed commutator ``[X, P] = i hbar f(P)``; bound states are solved in the
pseudo-position representation where ``X = i hbar d/dp`` on ``[-b, b]``.
"""

__version__ = "0.1.0"

from .algebra import (  # noqa: E402
    AlgebraContext,
    Custom,
    Deformation,
    ExpCbrt,
    ExpSqrt,
    PhysicalParams,
    PolyMinus,
    PolyPlus,
    Undeformed,
    compute_b,
    eval_f,
    g_eval,
    g_inverse,
    kempf,
    minimal_length,
)
from .errors import (  # noqa: E402
    BoundaryConditionError,
    BracketError,
    DeformedQMError,
    DomainError,
    FitError,
    PreconditionError,
    QuadratureError,
    RootFindingError,
)
from .numerics import QuadratureSpec, RootSpec  # noqa: E402
from .spectrum import EnergyLevel, ExtensionParam, solve_band, solve_level  # noqa: E402

__all__ = [
    "__version__",
    "AlgebraContext",
    "Custom",
    "Deformation",
    "ExpCbrt",
    "ExpSqrt",
    "PhysicalParams",
    "PolyMinus",
    "PolyPlus",
    "Undeformed",
    "compute_b",
    "eval_f",
    "g_eval",
    "g_inverse",
    "kempf",
    "minimal_length",
    "BoundaryConditionError",
    "BracketError",
    "DeformedQMError",
    "DomainError",
    "FitError",
    "PreconditionError",
    "QuadratureError",
    "RootFindingError",
    "QuadratureSpec",
    "RootSpec",
    "EnergyLevel",
    "ExtensionParam",
    "solve_band",
    "solve_level",
]
