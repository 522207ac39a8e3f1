"""Momentum-space bound states in the pseudo-position representation.

The solution of the integral Schroedinger equation on ``[-b, b]`` is

    phi(p) = C exp(-i varphi(p)) / (g(p)^2 + q^2),
    varphi(p) = (2 m alpha / hbar) int_0^p dp' / (g(p')^2 + q^2),

with ``C`` fixing unit norm.  A :class:`BoundState` caches ``varphi`` as an
adaptive piecewise Chebyshev antiderivative so dense evaluation and the
nested integrals of the residual check stay cheap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .algebra import AlgebraContext, g_eval
from .errors import PreconditionError
from .numerics import ChebyshevPanels, QuadratureSpec, RootSpec, integrate
from .spectrum import EnergyLevel, ExtensionParam

__all__ = [
    "Kernel",
    "BoundState",
    "phase",
    "normalization",
    "bound_state",
    "eval_state",
    "state_norm",
    "full_integral",
    "partial_integral",
    "integral_equation_residual",
    "chebyshev_samples",
]


def _require_finite_b(ctx: AlgebraContext):
    if math.isinf(ctx.b):
        raise PreconditionError("bound states on [-b, b] need a finite pseudo-momentum bound")


def _h(ctx, q, p, gap, quad, root):
    """``1 / (g(p)^2 + q^2)`` for ``0 <= p <= b``."""
    g = np.asarray(g_eval(ctx.family, p, quad, root, b=ctx.b, gap=gap))
    return 1.0 / (g * g + q * q)


def phase(
    ctx: AlgebraContext,
    q: float,
    p: float,
    quad: QuadratureSpec | None = None,
    root: RootSpec | None = None,
) -> float:
    """Cumulative phase ``varphi(p)`` by direct quadrature in ``p``.

    Odd in ``p``.  At ``p = b`` it equals the quantization integral
    ``Phi(q)`` (the substitution ``P = g(p)`` maps one onto the other).
    """
    quad = quad or QuadratureSpec()
    p = float(p)
    ap = abs(p)
    if ap > ctx.b:
        raise PreconditionError(f"|p| must not exceed b = {ctx.b!r}")
    if ap == 0.0:
        return 0.0
    pref = 2.0 * ctx.params.mass * ctx.params.alpha / ctx.params.hbar
    if math.isinf(ap):
        val = integrate(lambda x: _h(ctx, q, x, None, quad, root), 0.0, math.inf, quad).value
    elif math.isinf(ctx.b):
        val = integrate(lambda x: _h(ctx, q, x, None, quad, root), 0.0, ap, quad).value
    else:
        base = ctx.b - ap
        val = integrate(
            lambda x, dlo, dhi: _h(ctx, q, x, base + dhi, quad, root), 0.0, ap, quad, gaps=True
        ).value
    return math.copysign(pref * val, p)


def normalization(
    ctx: AlgebraContext,
    q: float,
    quad: QuadratureSpec | None = None,
    root: RootSpec | None = None,
) -> float:
    """``C = (int_{-b}^{b} dp / (g^2 + q^2)^2)^(-1/2)``."""
    if not q > 0:
        raise PreconditionError("q must be positive")
    quad = quad or QuadratureSpec()
    if math.isinf(ctx.b):
        val = integrate(lambda x: _h(ctx, q, x, None, quad, root) ** 2, 0.0, math.inf, quad).value
    else:
        val = integrate(
            lambda x, dlo, dhi: _h(ctx, q, x, dhi, quad, root) ** 2, 0.0, ctx.b, quad, gaps=True
        ).value
    return 1.0 / math.sqrt(2.0 * val)


@dataclass(frozen=True)
class Kernel:
    """Coulomb kernel ``U(p - p') = -(alpha / 2 hbar) (2 i theta(p' - p) - i + A)``.

    The step function takes the value 1/2 at coincident arguments.
    """

    A: float
    alpha: float
    hbar: float

    @classmethod
    def for_extension(cls, ext: ExtensionParam, params) -> "Kernel":
        return cls(ext.A, params.alpha, params.hbar)

    def __call__(self, p, pp):
        theta = np.heaviside(np.asarray(pp, dtype=float) - np.asarray(p, dtype=float), 0.5)
        return -(self.alpha / (2.0 * self.hbar)) * (2j * theta - 1j + self.A)

    def potential(self, full, partial):
        """``int U(p - p') phi(p') dp'`` from ``int_{-b}^{b} phi`` and ``int_{-b}^{p} phi``."""
        return -(self.alpha / (2.0 * self.hbar)) * ((1j + self.A) * full - 2j * partial)


@dataclass(frozen=True)
class BoundState:
    """Normalized eigenfunction of a level, with its cached phase.

    Both caches use the distance ``s = b - |p|`` as coordinate so that nodes
    next to the bound are exact.  ``h_cache(s)`` interpolates
    ``1 / (g^2 + q^2)``; ``phase_cache(s)`` is its antiderivative from
    ``s = 0``, so ``varphi(p) = pref (A(b) - A(b - |p|))`` with the sign of
    ``p``.
    """

    level: EnergyLevel
    C: float
    ctx: AlgebraContext
    h_cache: ChebyshevPanels
    phase_cache: ChebyshevPanels
    quad: QuadratureSpec
    root: RootSpec

    @property
    def q(self) -> float:
        return self.level.q

    @property
    def b(self) -> float:
        return self.ctx.b

    @property
    def phase_prefactor(self) -> float:
        par = self.ctx.params
        return 2.0 * par.mass * par.alpha / par.hbar

    @property
    def phase_b(self) -> float:
        """``varphi(b)``, equal to ``Phi(q)``."""
        return self.phase_prefactor * float(self.phase_cache(self.b))

    def phase_fn(self, p):
        p = np.asarray(p, dtype=float)
        gap = np.clip(self.b - np.abs(p), 0.0, self.b)
        tot = float(self.phase_cache(self.b))
        return np.sign(p) * self.phase_prefactor * (tot - self.phase_cache(gap))

    def h(self, p):
        p = np.asarray(p, dtype=float)
        return self.h_cache(np.clip(self.b - np.abs(p), 0.0, self.b))

    def modulus(self, p):
        """``C / (g(p)^2 + q^2)`` with ``g`` evaluated directly."""
        p = np.asarray(p, dtype=float)
        ap = np.abs(p)
        return self.C * _h(self.ctx, self.q, ap, self.b - ap, self.quad, self.root)

    def modulus_phase(self, p):
        """Amplitude as a ``(modulus, phase)`` pair; the amplitude is ``mod * exp(-i phase)``."""
        return self.modulus(p), self.phase_fn(p)


def bound_state(
    ctx: AlgebraContext,
    level: EnergyLevel,
    quad: QuadratureSpec | None = None,
    root: RootSpec | None = None,
    *,
    cache_tol: float = 1e-14,
) -> BoundState:
    """Build the normalized state of ``level`` (``level.q`` need not solve the condition)."""
    _require_finite_b(ctx)
    quad = quad or QuadratureSpec()
    root = root or RootSpec()
    q = level.q
    b = ctx.b
    h_cache = ChebyshevPanels.fit(lambda s: _h(ctx, q, b - s, s, quad, root), 0.0, b, tol=cache_tol)
    phase_cache = h_cache.antiderivative()
    C = normalization(ctx, q, quad, root)
    return BoundState(level, C, ctx, h_cache, phase_cache, quad, root)


def eval_state(state: BoundState, p):
    """Complex amplitude ``C exp(-i varphi(p)) / (g(p)^2 + q^2)`` for ``|p| <= b``."""
    p = np.asarray(p, dtype=float)
    if np.any(np.abs(p) > state.b):
        raise PreconditionError(f"|p| must not exceed b = {state.b!r}")
    mod, ph = state.modulus_phase(p)
    out = mod * np.exp(-1j * ph)
    return complex(out) if out.ndim == 0 else out


def _tail_integral(state: BoundState, sigma: float, quad: QuadratureSpec) -> complex:
    """``int_{b - sigma}^{b} phi dp`` from the caches, integrated in ``s = b - p``."""
    if sigma <= 0.0:
        return 0j
    pref = state.phase_prefactor
    tot = float(state.phase_cache(state.b))

    def fn(s):
        return state.C * state.h_cache(s) * np.exp(-1j * pref * (tot - state.phase_cache(s)))

    return complex(integrate(fn, 0.0, sigma, quad).value)


def partial_integral(state: BoundState, p: float, quad: QuadratureSpec | None = None) -> complex:
    """``int_{-b}^{p} phi dp'``, using ``phi(-p) = conj(phi(p))``."""
    quad = quad or state.quad
    p = float(p)
    if p <= 0.0:
        return complex(np.conj(_tail_integral(state, state.b + p, quad)))
    whole = _tail_integral(state, state.b, quad)
    return 2.0 * whole.real - _tail_integral(state, state.b - p, quad)


def state_norm(state: BoundState) -> float:
    """``int_{-b}^{b} |phi|^2 dp`` from the Chebyshev cache rather than direct ``g`` evaluations."""
    val = integrate(lambda s: state.h_cache(s) ** 2, 0.0, state.b, state.quad).value
    return 2.0 * state.C**2 * val


def full_integral(state: BoundState, quad: QuadratureSpec | None = None) -> tuple[complex, float]:
    """``int_{-b}^{b} phi dp`` by quadrature, and its closed form ``(hbar C/(m alpha)) sin varphi(b)``."""
    quad = quad or state.quad
    p = state.ctx.params
    val = 2.0 * _tail_integral(state, state.b, quad).real
    closed = p.hbar * state.C / (p.mass * p.alpha) * math.sin(state.phase_b)
    return complex(val), closed


def chebyshev_samples(b: float, count: int = 21) -> np.ndarray:
    """``count`` Chebyshev points of the first kind on ``(-b, b)``, increasing."""
    j = np.arange(count)
    return np.sort(b * np.cos(math.pi * (j + 0.5) / count))


def integral_equation_residual(
    state: BoundState,
    ext: ExtensionParam,
    p_samples=None,
    quad: QuadratureSpec | None = None,
) -> float:
    """Largest residual of the momentum-space integral equation at ``p_samples``.

    The residual of ``(g^2/2m) phi + int U phi - E phi`` is divided by
    ``max |phi|`` over the samples, giving energy units: an exact solution
    stays at rounding level relative to ``|E|``.  The full integral uses its
    closed form, the partial integral ``int_{-b}^{p} phi`` direct quadrature.
    For ``delta = 0`` (``A`` infinite) the equation is divided by ``A`` and
    only ``(alpha / 2 hbar) int phi`` survives.
    """
    quad = quad or state.quad
    params = state.ctx.params
    b = state.b
    ps = chebyshev_samples(b) if p_samples is None else np.asarray(p_samples, dtype=float)
    if np.any(np.abs(ps) > b):
        raise PreconditionError("samples must lie in [-b, b]")
    phi_b = state.phase_b
    full = params.hbar * state.C / (params.mass * params.alpha) * math.sin(phi_b)
    amp = np.atleast_1d(eval_state(state, ps))
    scale = float(np.max(np.abs(amp)))

    if ext.delta == 0.0:
        return abs(params.alpha / (2.0 * params.hbar) * full) / scale

    kernel = Kernel.for_extension(ext, params)
    m = params.mass
    E = state.level.E
    g = np.atleast_1d(np.asarray(g_eval(state.ctx.family, np.abs(ps), quad, state.root,
                                        b=b, gap=b - np.abs(ps)), dtype=float)) * np.sign(ps)
    worst = 0.0
    for p, gp, phi in zip(ps, g, amp):
        partial = partial_integral(state, p, quad)
        lhs = (gp * gp / (2.0 * m)) * phi + kernel.potential(full, partial) - E * phi
        worst = max(worst, abs(lhs))
    return worst / scale
