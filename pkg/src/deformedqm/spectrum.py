"""Bound-state spectrum of the 1D Coulomb problem in a deformed algebra.

Levels follow from the quantization condition

    Phi(q) = (2 m alpha / hbar) int_0^a dP / (f(P) (P^2 + q^2)) = pi (n + delta)

with ``q = sqrt(-2 m E)``.  ``Phi`` decreases strictly from infinity to zero,
so each ``n + delta > 0`` has exactly one root.  Closed-form spectra and the
leading small-beta corrections of the polynomial and exponential families are
provided as independent oracles for the numerical pipeline.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.special import gamma, rgamma

from .algebra import (
    AlgebraContext,
    Deformation,
    ExpCbrt,
    ExpSqrt,
    PhysicalParams,
    PolyMinus,
    PolyPlus,
    Undeformed,
)
from .errors import FitError, PreconditionError
from .numerics import QuadratureSpec, RootSpec, integrate, solve_root

__all__ = [
    "ExtensionParam",
    "EnergyLevel",
    "quantization_integral",
    "solve_momentum",
    "solve_level",
    "solve_band",
    "closed_form_energy",
    "closed_form_solution",
    "leading_correction",
    "formula_coefficient",
    "dq2_dbeta",
    "CorrectionFit",
    "nominal_exponent",
    "correction_vs_numeric",
    "undeformed_energy",
]


@dataclass(frozen=True)
class ExtensionParam:
    """Self-adjoint extension label ``delta`` in ``[0, 1)``.

    Related to the constant ``A`` of the inverse position operator by
    ``delta = arccot(A) / pi``.  ``A = +inf`` gives ``delta = 0``; ``A = -inf``
    gives ``delta = 1``, which is identified with ``0``.
    """

    delta: float

    def __post_init__(self):
        if not (0.0 <= self.delta < 1.0):
            raise ValueError(f"delta must lie in [0, 1), got {self.delta!r}")

    @classmethod
    def from_A(cls, A: float) -> "ExtensionParam":
        if math.isnan(A):
            raise ValueError("A must not be NaN")
        if math.isinf(A):
            return cls(0.0)
        # arccot with range (0, pi): arccot(A) = pi/2 - arctan(A)
        return cls(0.5 - math.atan(A) / math.pi)

    @property
    def A(self) -> float:
        """``cot(pi delta)``, exact zero at ``delta = 1/2`` and ``inf`` at 0."""
        if self.delta == 0.0:
            return math.inf
        return math.tan(math.pi * (0.5 - self.delta))


@dataclass(frozen=True)
class EnergyLevel:
    n: int
    delta: ExtensionParam
    q: float
    E: float
    residual: float = 0.0


def _delta_of(ext) -> float:
    return ext.delta if isinstance(ext, ExtensionParam) else float(ext)


def _prefactor(params: PhysicalParams) -> float:
    return 2.0 * params.mass * params.alpha / params.hbar


def _momentum_integral(family: Deformation, weight: Callable, quad: QuadratureSpec) -> float:
    """``int_0^a weight(P) / f(P) dP`` with endpoint gaps for finite ``a``."""
    a = family.a
    if math.isinf(a):
        return integrate(lambda P: weight(P) * family.inv_f(P), 0.0, math.inf, quad).value
    return integrate(
        lambda P, dlo, dhi: weight(P) * family.inv_f(P, dhi), 0.0, a, quad, gaps=True
    ).value


def quantization_integral(ctx: AlgebraContext, q: float, quad: QuadratureSpec | None = None) -> float:
    """``Phi(q)``: the left-hand side of the quantization condition."""
    if not q > 0:
        raise PreconditionError(f"q must be positive, got {q!r}")
    quad = quad or QuadratureSpec()
    q2 = q * q
    J = _momentum_integral(ctx.family, lambda P: 1.0 / (P * P + q2), quad)
    return _prefactor(ctx.params) * J


def undeformed_energy(params: PhysicalParams, nu: float) -> float:
    """``-alpha^2 m / (2 hbar^2 nu^2)`` with ``nu = n + delta``."""
    return -params.alpha**2 * params.mass / (2.0 * params.hbar**2 * nu**2)


def solve_momentum(
    ctx: AlgebraContext,
    nu: float,
    quad: QuadratureSpec | None = None,
    root: RootSpec | None = None,
) -> float:
    """Momentum ``q`` with ``Phi(q) = pi nu``.

    ``nu`` must carry the sign of ``alpha``.  The search starts at the
    undeformed root ``|alpha| m / (hbar |nu|)``.
    """
    quad = quad or QuadratureSpec()
    root = root or RootSpec()
    p = ctx.params
    if nu == 0 or (nu > 0) != (p.alpha > 0):
        raise PreconditionError(
            "no bound state: n + delta must be nonzero with the sign of alpha "
            "(the level n = 0, delta = 0 is excluded since Phi(q) = 0 has no finite root)"
        )
    if math.isinf(ctx.b) and not isinstance(ctx.family, Undeformed):
        raise PreconditionError("spectrum needs a finite pseudo-momentum bound or the undeformed case")
    target = math.pi * nu
    seed = abs(p.alpha) * p.mass / (p.hbar * abs(nu))
    return solve_root(lambda q: quantization_integral(ctx, q, quad) - target, seed, root, domain="positive")


def solve_level(
    ctx: AlgebraContext,
    n: int,
    ext: ExtensionParam,
    quad: QuadratureSpec | None = None,
    root: RootSpec | None = None,
) -> EnergyLevel:
    """Energy level ``n`` of the extension ``ext``.

    Raises :class:`PreconditionError` for ``n + delta <= 0`` (in particular
    ``n = 0`` with ``delta = 0``).
    """
    if int(n) != n:
        raise ValueError("n must be an integer")
    n = int(n)
    quad = quad or QuadratureSpec()
    nu = n + _delta_of(ext)
    if ctx.params.alpha > 0 and nu <= 0:
        raise PreconditionError(
            f"level n={n}, delta={_delta_of(ext)!r} has n + delta <= 0; "
            "the pair n = 0, delta = 0 has no bound state"
        )
    q = solve_momentum(ctx, nu, quad, root)
    E = -q * q / (2.0 * ctx.params.mass)
    residual = quantization_integral(ctx, q, quad) - math.pi * nu
    ext = ext if isinstance(ext, ExtensionParam) else ExtensionParam(float(ext))
    return EnergyLevel(n, ext, q, E, residual)


def solve_band(
    ctx: AlgebraContext,
    n_range: Iterable[int],
    ext: ExtensionParam,
    quad: QuadratureSpec | None = None,
    root: RootSpec | None = None,
) -> list[EnergyLevel]:
    """Independent solves for every ``n`` in ``n_range``, ordered by ``n``."""
    return [solve_level(ctx, n, ext, quad, root) for n in sorted(n_range)]


# ---------------------------------------------------------------------------
# closed forms


def _kempf_energy(beta, params, nu):
    m, hbar, alpha = params.mass, params.hbar, params.alpha
    x = 4.0 * m * alpha * math.sqrt(beta) / (hbar * nu)
    # (1 - sqrt(1 + x))^2 = x^2 / (1 + sqrt(1 + x))^2, free of cancellation
    return -(x * x) / (8.0 * m * beta * (1.0 + math.sqrt(1.0 + x)) ** 2)


def _sqrt_minus_energy(beta, params, nu):
    m, hbar, alpha = params.mass, params.hbar, params.alpha
    y = 4.0 * m * m * alpha * alpha * beta / (hbar * hbar * nu * nu)
    return -y / (4.0 * m * beta * (1.0 + math.sqrt(1.0 + y)))


def _level_rhs(params, nu):
    # both level equations below equal int_0^a dP/(f (P^2+q^2)) = pi hbar nu / (2 m alpha)
    return math.pi * params.hbar * nu / (2.0 * params.mass * params.alpha)


def _polyplus32_residual(beta, params, nu):
    sb = math.sqrt(beta)
    rhs = _level_rhs(params, nu)

    def residual(q):
        bq2 = beta * q * q
        c = sb * q
        if bq2 < 1.0:
            s = math.sqrt(1.0 - bq2)
            core = math.atan(s / c) / (q * s)
        elif bq2 > 1.0:
            t = math.sqrt(bq2 - 1.0)
            core = math.atanh(t / c) / (q * t)
        else:
            # limit of both branches at beta q^2 = 1
            core = 1.0 / (q * c)
        return (core - sb) / (1.0 - bq2) - rhs

    return residual


def _pedram_residual(beta, params, nu):
    sb = math.sqrt(beta)
    rhs = _level_rhs(params, nu)

    def residual(q):
        # arccot(x) = arctan(1/x) for x > 0
        return (1.0 + beta * q * q) / q * math.atan(1.0 / (sb * q)) - sb - rhs

    return residual


def closed_form_energy(family: Deformation, params: PhysicalParams, n: int, ext: ExtensionParam):
    """Exact energy, or the transcendental level equation as a function of ``q``.

    Explicit energies: undeformed, ``PolyPlus(k=1)`` and ``PolyMinus(k=1/2)``.
    Level equations (returned as ``residual(q)``, zero at the level):
    ``PolyPlus(k=3/2)`` and ``PolyMinus(k=-1)``.
    """
    nu = n + _delta_of(ext)
    if nu == 0:
        raise PreconditionError("n + delta must be nonzero")
    if isinstance(family, Undeformed):
        return undeformed_energy(params, nu)
    if isinstance(family, PolyPlus) and family.k == 1.0:
        return _kempf_energy(family.beta, params, nu)
    if isinstance(family, PolyMinus) and family.k == 0.5:
        return _sqrt_minus_energy(family.beta, params, nu)
    if isinstance(family, PolyPlus) and family.k == 1.5:
        return _polyplus32_residual(family.beta, params, nu)
    if isinstance(family, PolyMinus) and family.k == -1.0:
        return _pedram_residual(family.beta, params, nu)
    raise PreconditionError(f"no closed form known for {family.label()}")


def closed_form_solution(
    family: Deformation, params: PhysicalParams, n: int, ext: ExtensionParam,
    root: RootSpec | None = None,
) -> float:
    """Energy from :func:`closed_form_energy`, solving level equations if needed."""
    res = closed_form_energy(family, params, n, ext)
    if not callable(res):
        return res
    nu = n + _delta_of(ext)
    seed = abs(params.alpha) * params.mass / (params.hbar * abs(nu))
    q = solve_root(res, seed, root, domain="positive")
    return -q * q / (2.0 * params.mass)


# ---------------------------------------------------------------------------
# corrections


def _cubic_scale(params, nu):
    return params.alpha**3 * params.mass**2 / (params.hbar**3 * nu**3)


def leading_correction(family: Deformation, params: PhysicalParams, n: int, ext: ExtensionParam) -> float:
    """Leading deformation shift ``Delta E_n`` with ``E_n ~ E_undeformed + Delta E_n``.

    ``PolyPlus``: ``2 sqrt(beta) Gamma(k+1/2) / (sqrt(pi) Gamma(k))`` times
    ``alpha^3 m^2 / (hbar^3 nu^3)``; ``PolyMinus``: the same with
    ``Gamma(1-k) / Gamma(1/2-k)`` (zero at ``k = 1/2``, where the shift is of
    order beta).  The exponential families have the logarithmic and
    ``beta^(1/3)`` forms.
    """
    nu = n + _delta_of(ext)
    if nu == 0:
        raise PreconditionError("n + delta must be nonzero")
    m, hbar, alpha = params.mass, params.hbar, params.alpha
    c3 = _cubic_scale(params, nu)
    if isinstance(family, PolyPlus):
        k = family.k
        return 2.0 * math.sqrt(family.beta) * gamma(k + 0.5) / (math.sqrt(math.pi) * gamma(k)) * c3
    if isinstance(family, PolyMinus):
        k = family.k
        # rgamma vanishes at the pole of Gamma(1/2 - k), i.e. k = 1/2
        return 2.0 * math.sqrt(family.beta) * gamma(1.0 - k) * rgamma(0.5 - k) / math.sqrt(math.pi) * c3
    if isinstance(family, ExpSqrt):
        sb = math.sqrt(family.beta)
        # positive shift: f >= 1 lowers Phi, so |E| decreases
        return -(2.0 / math.pi) * c3 * sb * math.log(abs(alpha) * m * sb / hbar)
    if isinstance(family, ExpCbrt):
        sb = math.sqrt(family.beta)
        z = abs(alpha * m * sb / (hbar * nu))
        return 2.0 * alpha**2 * m / (hbar**2 * nu**2) * z ** (2.0 / 3.0)
    raise PreconditionError(f"no leading correction known for {family.label()}")


def formula_coefficient(family: Deformation, params: PhysicalParams, n: int, ext: ExtensionParam) -> float:
    """Coefficient of :func:`leading_correction` in the form fitted by :func:`correction_vs_numeric`.

    Power-law families: ``Delta E / beta**p0``.  ``ExpSqrt``: the factor of
    ``sqrt(beta) ln(beta)``, which is ``-alpha^3 m^2 / (pi hbar^3 nu^3)``.
    """
    if isinstance(family, ExpSqrt):
        return -_cubic_scale(params, n + _delta_of(ext)) / math.pi
    nominal_exponent(family)  # rejects families without a scaling law
    # the formula is exactly proportional to beta**p0, so evaluate it at beta = 1
    return leading_correction(family.with_beta(1.0), params, n, ext)


def dq2_dbeta(ctx: AlgebraContext, q: float, quad: QuadratureSpec | None = None) -> float:
    """``d q^2 / d beta`` along a level, from two momentum integrals.

    ``(1 / 2 beta) * int (P^2 - q^2) / ((P^2 + q^2)^2 f) / int 1 / ((P^2 + q^2)^2 f)``.
    Valid for families that depend on beta only through ``sqrt(beta) P``.
    """
    beta = getattr(ctx.family, "beta", None)
    if beta is None or not beta > 0:
        raise PreconditionError("d q^2/d beta needs a deformed family with beta > 0")
    if not q > 0:
        raise PreconditionError("q must be positive")
    quad = quad or QuadratureSpec()
    q2 = q * q

    def num_w(P):
        r = 1.0 / (P * P + q2)
        return (P * P - q2) * r * r

    def den_w(P):
        r = 1.0 / (P * P + q2)
        return r * r

    den = _momentum_integral(ctx.family, den_w, quad)
    if not den > 0 or not math.isfinite(den):
        raise PreconditionError("denominator integral underflowed")
    # the numerator vanishes as beta -> 0, so its tolerance is set by the integrand scale
    num_quad = replace(quad, abs_tol=min(0.5, max(quad.abs_tol, quad.rel_tol * q2 * den)))
    num = _momentum_integral(ctx.family, num_w, num_quad)
    return num / den / (2.0 * beta)


@dataclass(frozen=True)
class CorrectionFit:
    """Scaling fit of ``Delta E(beta) = E_num(beta) - E_undeformed``.

    ``coefficient`` is ``lim Delta E / beta**nominal_exponent``; for the
    logarithmic family it is the coefficient of ``beta**p * ln(beta)`` in the
    joint fit ``beta**p (offset + coefficient * ln beta)``.
    """

    exponent: float
    coefficient: float
    nominal_exponent: float
    offset: float | None
    betas: tuple
    shifts: tuple


def nominal_exponent(family: Deformation) -> float:
    if isinstance(family, PolyMinus) and family.k == 0.5:
        return 1.0
    if isinstance(family, (PolyPlus, PolyMinus, ExpSqrt)):
        return 0.5
    if isinstance(family, ExpCbrt):
        return 1.0 / 3.0
    raise PreconditionError(f"no scaling law known for {family.label()}")


def _log_power_fit(betas, shifts):
    """Fit ``shift = beta**p (A + B ln beta)`` minimizing relative residuals."""
    lb = np.log(betas)

    def solve(p):
        X = np.column_stack([betas**p, betas**p * lb]) / shifts[:, None]
        coef, *_ = np.linalg.lstsq(X, np.ones_like(shifts), rcond=None)
        r = X @ coef - 1.0
        return float(r @ r), coef

    res = minimize_scalar(lambda p: solve(p)[0], bounds=(0.05, 1.5), method="bounded",
                          options={"xatol": 1e-10})
    p = float(res.x)
    _, (A, B) = solve(p)
    return p, float(A), float(B)


def correction_vs_numeric(
    family: Deformation,
    params: PhysicalParams,
    n: int,
    ext: ExtensionParam,
    beta_grid: Sequence[float],
    quad: QuadratureSpec | None = None,
    root: RootSpec | None = None,
) -> CorrectionFit:
    """Fit the numerically solved energy shift against ``beta``.

    The exponent comes from a free log-log fit (joint power-times-log fit for
    ``ExpSqrt``); the coefficient from ``Delta E / beta**p0 = c + d beta**p0``
    with the family's nominal exponent ``p0``, so ``c`` is directly comparable
    with :func:`leading_correction` divided by ``beta**p0``.
    """
    quad = quad or QuadratureSpec(rel_tol=1e-14, abs_tol=1e-300)
    root = root or RootSpec(tol=1e-15)
    betas = np.array(sorted(float(b) for b in beta_grid))
    if len(betas) < 3:
        raise FitError("need at least three beta values")
    if not betas[0] > 0 or betas[-1] / betas[0] < 100.0:
        raise PreconditionError("beta grid must be positive and span at least two decades")
    p0 = nominal_exponent(family)
    nu = n + _delta_of(ext)
    e0 = undeformed_energy(params, nu)
    shifts = []
    for beta in betas:
        ctx = AlgebraContext.build(family.with_beta(float(beta)), params, quad)
        shifts.append(solve_level(ctx, n, ext, quad, root).E - e0)
    shifts = np.array(shifts)
    if not np.all(np.isfinite(shifts)) or np.any(shifts == 0):
        raise FitError("energy shifts vanish or are not finite")
    if not (np.all(shifts > 0) or np.all(shifts < 0)):
        raise FitError("energy shift changes sign across the beta grid")

    if isinstance(family, ExpSqrt):
        p, A, B = _log_power_fit(betas, shifts)
        return CorrectionFit(p, B, p0, A, tuple(betas), tuple(shifts))

    slope, _ = np.polyfit(np.log(betas), np.log(np.abs(shifts)), 1)
    x = betas**p0
    d, c = np.polyfit(x, shifts / x, 1)
    return CorrectionFit(float(slope), float(c), p0, None, tuple(betas), tuple(shifts))
