"""Deformation functions f(P), momentum bounds and the pseudo-position map.

A deformed algebra ``[X, P] = i hbar f(P)`` is described by a positive even
deformation function on ``(-a, a)``.  In the pseudo-position representation
``P = g(p)`` with ``g^{-1}(P) = int_0^P dP'/f(P')`` defined on ``[-b, b]``,
``b = int_0^a dP/f``, and the minimal length is ``l0 = pi hbar / (2 b)``.

Families whose endpoint ``a`` is finite receive the distance ``a - |P|``
(``gap``) so that ``1/f`` stays accurate next to the bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, ClassVar

import numpy as np

from .errors import BracketError, DomainError, PreconditionError, RootFindingError
from .numerics import QuadratureSpec, RootSpec, integrate, integrate_many

__all__ = [
    "PhysicalParams",
    "Deformation",
    "Undeformed",
    "PolyPlus",
    "PolyMinus",
    "ExpSqrt",
    "ExpCbrt",
    "Custom",
    "kempf",
    "AlgebraContext",
    "eval_f",
    "compute_b",
    "minimal_length",
    "g_inverse",
    "g_eval",
]


@dataclass(frozen=True)
class PhysicalParams:
    """Physical constants hbar, m and the Coulomb strength alpha.

    ``alpha`` may be negative: the repulsive partner is only used to check
    the parity identity of the quantization condition.
    """

    hbar: float = 1.0
    mass: float = 1.0
    alpha: float = 1.0

    def __post_init__(self):
        for name in ("hbar", "mass"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be positive and finite, got {v!r}")
        if not (math.isfinite(self.alpha) and self.alpha != 0):
            raise ValueError(f"alpha must be nonzero and finite, got {self.alpha!r}")


def _outer_half(x, cut, inner, outer):
    """``outer`` where ``|x| > cut``, else ``inner``: gap forms cancel near the origin."""
    return np.where(np.abs(x) > cut, outer, inner)


def _check_beta(beta):
    if not (math.isfinite(beta) and beta > 0):
        raise ValueError(f"beta must be positive and finite, got {beta!r}")


@dataclass(frozen=True)
class Deformation:
    """Base class of the deformation families.

    Subclasses implement :meth:`inv_f` (vectorized ``1/f``) and may override
    the closed forms, which return ``None`` when unavailable.
    """

    name: ClassVar[str] = "deformation"

    @property
    def a(self) -> float:
        return math.inf

    @property
    def minimal_length_exists(self) -> bool:
        return True

    def inv_f(self, P, gap=None):
        raise NotImplementedError

    def f(self, P, gap=None):
        return 1.0 / self.inv_f(P, gap)

    def b_closed(self) -> float | None:
        return None

    def g_inverse_closed(self, P, gap=None):
        return None

    def g_closed(self, p, gap=None):
        return None

    def with_beta(self, beta: float) -> "Deformation":
        raise PreconditionError(f"{self.name} has no deformation parameter beta")

    def label(self) -> str:
        return self.name


@dataclass(frozen=True)
class Undeformed(Deformation):
    name: ClassVar[str] = "none"

    @property
    def minimal_length_exists(self) -> bool:
        return False

    def inv_f(self, P, gap=None):
        return np.ones_like(np.asarray(P, dtype=float))

    def g_inverse_closed(self, P, gap=None):
        return np.asarray(P, dtype=float)

    def g_closed(self, p, gap=None):
        return np.asarray(p, dtype=float)


@dataclass(frozen=True)
class PolyPlus(Deformation):
    """``f(P) = (1 + beta P^2)^k`` with ``k > 1/2`` and ``a = inf``."""

    beta: float
    k: float = 1.0
    name: ClassVar[str] = "polyplus"

    def __post_init__(self):
        _check_beta(self.beta)
        if not (math.isfinite(self.k) and self.k > 0.5):
            raise ValueError(f"PolyPlus needs k > 1/2 for a minimal length, got k={self.k!r}")

    def inv_f(self, P, gap=None):
        P = np.asarray(P, dtype=float)
        return (1.0 + self.beta * P * P) ** (-self.k)

    def b_closed(self):
        if self.k == 1.0:
            return math.pi / (2.0 * math.sqrt(self.beta))
        if self.k == 1.5:
            return 1.0 / math.sqrt(self.beta)
        return None

    def g_inverse_closed(self, P, gap=None):
        P = np.asarray(P, dtype=float)
        sb = math.sqrt(self.beta)
        if self.k == 1.0:
            return np.arctan(sb * P) / sb
        if self.k == 1.5:
            return P / np.sqrt(1.0 + self.beta * P * P)
        return None

    def g_closed(self, p, gap=None):
        p = np.asarray(p, dtype=float)
        sb = math.sqrt(self.beta)
        if self.k == 1.0:
            inner = np.tan(sb * p) / sb
            if gap is None:
                return inner
            # tan(pi/2 - x) = 1/tan(x) keeps full precision next to +-b
            outer = np.sign(p) / (sb * np.tan(sb * np.asarray(gap, dtype=float)))
            return _outer_half(sb * p, 0.25 * math.pi, inner, outer)
        if self.k == 1.5:
            if gap is None:
                return p / np.sqrt(1.0 - self.beta * p * p)
            gap = np.asarray(gap, dtype=float)
            return p / np.sqrt(sb * gap * (1.0 + sb * np.abs(p)))
        return None

    def with_beta(self, beta):
        return replace(self, beta=beta)

    def label(self):
        return f"polyplus(beta={self.beta!r}, k={self.k!r})"


def kempf(beta: float) -> PolyPlus:
    """The Kempf deformation ``f(P) = 1 + beta P^2``."""
    return PolyPlus(beta, 1.0)


@dataclass(frozen=True)
class PolyMinus(Deformation):
    """``f(P) = (1 - beta P^2)^k`` with ``k < 1`` on ``|P| < 1/sqrt(beta)``."""

    beta: float
    k: float = 0.5
    name: ClassVar[str] = "polyminus"

    def __post_init__(self):
        _check_beta(self.beta)
        if not (math.isfinite(self.k) and self.k < 1.0):
            raise ValueError(f"PolyMinus needs k < 1 for a minimal length, got k={self.k!r}")

    @property
    def a(self) -> float:
        return 1.0 / math.sqrt(self.beta)

    def _one_minus(self, P, gap):
        P = np.abs(np.asarray(P, dtype=float))
        if gap is None:
            return 1.0 - self.beta * P * P
        sb = math.sqrt(self.beta)
        # 1 - beta P^2 = (1 - sqrt(beta)|P|)(1 + sqrt(beta)|P|)
        return sb * np.asarray(gap, dtype=float) * (1.0 + sb * P)

    def inv_f(self, P, gap=None):
        if self.k == 0.0:
            return np.ones_like(np.asarray(P, dtype=float))
        return self._one_minus(P, gap) ** (-self.k)

    def b_closed(self):
        sb = math.sqrt(self.beta)
        if self.k == 0.5:
            return math.pi / (2.0 * sb)
        if self.k == -1.0:
            return 2.0 / (3.0 * sb)
        if self.k == 0.0:
            return 1.0 / sb
        return None

    def g_inverse_closed(self, P, gap=None):
        P = np.asarray(P, dtype=float)
        sb = math.sqrt(self.beta)
        if self.k == 0.5:
            inner = np.arcsin(np.clip(sb * P, -1.0, 1.0)) / sb
            if gap is None:
                return inner
            # arcsin(1 - e) = pi/2 - 2 arcsin(sqrt(e/2)) with e = sqrt(beta) gap
            e = sb * np.asarray(gap, dtype=float)
            outer = np.sign(P) * (0.5 * math.pi - 2.0 * np.arcsin(np.sqrt(0.5 * e))) / sb
            return _outer_half(sb * P, 0.5, inner, outer)
        if self.k == -1.0:
            return P - self.beta * P**3 / 3.0
        if self.k == 0.0:
            return P
        return None

    def g_closed(self, p, gap=None):
        p = np.asarray(p, dtype=float)
        sb = math.sqrt(self.beta)
        if self.k == 0.5:
            inner = np.sin(sb * p) / sb
            if gap is None:
                return inner
            outer = np.sign(p) * np.cos(sb * np.asarray(gap, dtype=float)) / sb
            return _outer_half(sb * p, 0.25 * math.pi, inner, outer)
        if self.k == 0.0:
            return p
        if self.k == -1.0:
            # t - t^3/3 = u with t = 2 sin x gives u = (2/3) sin 3x
            x = np.arcsin(np.clip(1.5 * sb * np.abs(p), 0.0, 1.0)) / 3.0
            inner = 2.0 * np.sin(x)
            if gap is not None:
                # cancellation-free distance to the bound, used on the outer half
                d = (2.0 / 3.0) * np.arcsin(np.sqrt(0.75 * sb * np.asarray(gap, dtype=float)))
                outer = 1.0 - 2.0 * np.sin(0.5 * d) ** 2 - math.sqrt(3.0) * np.sin(d)
                inner = _outer_half(sb * p, 1.0 / 3.0, inner, outer)
            return np.sign(p) * inner / sb
        return None

    def with_beta(self, beta):
        return replace(self, beta=beta)

    def label(self):
        return f"polyminus(beta={self.beta!r}, k={self.k!r})"


@dataclass(frozen=True)
class ExpSqrt(Deformation):
    """``f(P) = exp(sqrt(beta) |P|)``."""

    beta: float
    name: ClassVar[str] = "expsqrt"

    def __post_init__(self):
        _check_beta(self.beta)

    def inv_f(self, P, gap=None):
        return np.exp(-math.sqrt(self.beta) * np.abs(np.asarray(P, dtype=float)))

    def b_closed(self):
        return 1.0 / math.sqrt(self.beta)

    def g_inverse_closed(self, P, gap=None):
        P = np.asarray(P, dtype=float)
        sb = math.sqrt(self.beta)
        return -np.sign(P) * np.expm1(-sb * np.abs(P)) / sb

    def g_closed(self, p, gap=None):
        p = np.asarray(p, dtype=float)
        sb = math.sqrt(self.beta)
        inner = -np.sign(p) * np.log1p(-np.minimum(sb * np.abs(p), 1.0)) / sb
        if gap is None:
            return inner
        # 1 - sqrt(beta)|p| = sqrt(beta) (b - |p|)
        outer = -np.sign(p) * np.log(sb * np.asarray(gap, dtype=float)) / sb
        return _outer_half(sb * p, 0.5, inner, outer)

    def with_beta(self, beta):
        return replace(self, beta=beta)

    def label(self):
        return f"expsqrt(beta={self.beta!r})"


@dataclass(frozen=True)
class ExpCbrt(Deformation):
    """``f(P) = exp((beta P^2)^(1/3))``; ``b`` and ``g`` are numerical."""

    beta: float
    name: ClassVar[str] = "expcbrt"

    def __post_init__(self):
        _check_beta(self.beta)

    def inv_f(self, P, gap=None):
        P = np.asarray(P, dtype=float)
        return np.exp(-np.cbrt(self.beta * P * P))

    def with_beta(self, beta):
        return replace(self, beta=beta)

    def label(self):
        return f"expcbrt(beta={self.beta!r})"


@dataclass(frozen=True)
class Custom(Deformation):
    """User supplied even, positive ``f`` on ``(-a, a)``.

    Whether ``int_0^a dP/f`` converges is declared by the caller through
    ``minimal_length``; it is not detected numerically.
    """

    function: Callable
    bound: float = math.inf
    minimal_length: bool = True
    name: ClassVar[str] = "custom"

    def __post_init__(self):
        if not callable(self.function):
            raise ValueError("Custom deformation needs a callable f")
        if not self.bound > 0:
            raise ValueError("momentum bound a must be positive")

    @property
    def a(self) -> float:
        return float(self.bound)

    @property
    def minimal_length_exists(self) -> bool:
        return self.minimal_length

    def inv_f(self, P, gap=None):
        return 1.0 / np.asarray(self.function(np.asarray(P, dtype=float)), dtype=float)


# ---------------------------------------------------------------------------


def eval_f(family: Deformation, P):
    """Deformation function ``f(P)``; raises :class:`DomainError` for ``|P| >= a``."""
    P = np.asarray(P, dtype=float)
    if np.any(np.abs(P) >= family.a):
        raise DomainError(f"|P| must be below the momentum bound a = {family.a!r}")
    out = family.f(P)
    return float(out) if out.ndim == 0 else out


def _tail_integral(family, P, gap, quad):
    """``int_P^a dP'/f`` for scalar ``0 <= P < a``."""
    a = family.a
    if math.isinf(a):
        return integrate(family.inv_f, P, math.inf, quad).value
    return integrate(
        lambda x, dlo, dhi: family.inv_f(x, dhi), P, a, quad, gaps=True
    ).value


def compute_b(family: Deformation, quad: QuadratureSpec | None = None) -> float:
    """Pseudo-momentum bound ``b = int_0^a dP/f``; ``inf`` without a minimal length."""
    if not family.minimal_length_exists:
        return math.inf
    closed = family.b_closed()
    if closed is not None:
        return closed
    return _tail_integral(family, 0.0, family.a, quad or QuadratureSpec())


def g_inverse(family: Deformation, P, quad: QuadratureSpec | None = None, gap=None):
    """Pseudo-momentum ``g^{-1}(P) = int_0^P dP'/f`` (odd, increasing).

    ``gap = a - |P|`` may be given for finite ``a`` to keep precision at the
    bound.  Accepts scalars or arrays.
    """
    P = np.asarray(P, dtype=float)
    if np.any(np.abs(P) > family.a) or (math.isfinite(family.a) and np.any(np.abs(P) == family.a) and gap is None):
        raise DomainError(f"|P| must be below the momentum bound a = {family.a!r}")
    closed = family.g_inverse_closed(P, gap)
    if closed is not None:
        return float(closed) if closed.ndim == 0 else closed
    quad = quad or QuadratureSpec()
    absP = np.abs(P).ravel()
    gaps = None if gap is None else np.broadcast_to(np.asarray(gap, dtype=float), P.shape).ravel()
    if gaps is None and math.isfinite(family.a):
        gaps = family.a - absP
    out = np.zeros_like(absP)
    nz = absP > 0.0
    if np.any(nz):
        out[nz] = _ginv_many(family, absP[nz], None if gaps is None else gaps[nz], quad)
    out = (np.sign(P.ravel()) * out).reshape(P.shape)
    return float(out) if out.ndim == 0 else out


def _ginv_many(family, P, gapP, quad):
    """``int_0^P dP'/f`` for positive ``P`` (rows), ``gapP = a - P`` for finite ``a``."""
    if gapP is None:
        return integrate_many(lambda t, dlo, dhi: family.inv_f(t), np.zeros_like(P), P, quad)
    g2 = gapP[:, None]
    return integrate_many(lambda t, dlo, dhi: family.inv_f(t, g2 + dhi), np.zeros_like(P), P, quad)


def _tail_many(family, P, quad):
    """``int_P^inf dP'/f`` for ``a = inf``."""
    return integrate_many(lambda t, dlo, dhi: family.inv_f(t), P, np.inf, quad)


def _edge_many(family, s, quad):
    """``int_{a-s}^a dP'/f`` for finite ``a``; ``s`` is the distance to ``a``."""
    a = family.a
    # integrate over the distance r = a - P, exact even when a - s rounds to a
    return integrate_many(lambda r, dlo, dhi: family.inv_f(a - r, r), np.zeros_like(s), s, quad)


def _newton_many(F, dF, x, lo, hi, tol, max_iter, *, log_scale=False):
    """Vectorized safeguarded Newton for increasing ``F`` on brackets ``[lo, hi]``.

    ``F(x, rows)`` evaluates the rows selected by the boolean mask ``rows``.
    Steps leaving the bracket, or iterations that fail to halve it, fall back
    to bisection.  With ``log_scale`` the unknown is a logarithm and ``tol``
    applies absolutely.
    """
    x = x.copy()
    lo = lo.copy()
    hi = hi.copy()
    width = hi - lo
    done = np.zeros(x.shape, dtype=bool)
    for _ in range(max_iter):
        act = ~done
        if not act.any():
            return x
        xa = x[act]
        fx = F(xa, act)
        lo_a = np.where(fx < 0.0, xa, lo[act])
        hi_a = np.where(fx > 0.0, xa, hi[act])
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            xn = xa - fx / dF(xa, act)
        slow = hi_a - lo_a > 0.5 * width[act]
        bad = ~np.isfinite(xn) | (xn <= lo_a) | (xn >= hi_a) | slow
        xn = np.where(bad, 0.5 * (lo_a + hi_a), xn)
        exact = fx == 0.0
        xn = np.where(exact, xa, xn)
        unit = 1.0 if log_scale else np.abs(xn)
        conv = exact | (np.abs(xn - xa) <= tol * unit) | (hi_a - lo_a <= tol * unit)
        # the width only resets when a bisection actually happened
        width[act] = np.where(slow, hi_a - lo_a, width[act])
        lo[act], hi[act], x[act] = lo_a, hi_a, xn
        done[np.flatnonzero(act)[conv]] = True
    raise RootFindingError("batched Newton iteration exhausted max_iter")


def _expand_many(F, x, growth, limit_lo, limit_hi, max_iter):
    """Grow brackets ``[lo, hi]`` around ``x`` geometrically until ``F`` changes sign."""
    lo = x.copy()
    hi = x.copy()
    all_rows = np.ones(x.shape, dtype=bool)
    f = F(x, all_rows)
    need_hi = f < 0.0
    need_lo = f > 0.0
    for _ in range(max_iter):
        if not (need_hi.any() or need_lo.any()):
            return lo, hi
        if need_hi.any():
            lo[need_hi] = hi[need_hi]
            hi[need_hi] = np.minimum(hi[need_hi] * growth, limit_hi)
            fh = F(hi[need_hi], need_hi)
            stuck = hi[need_hi] >= limit_hi
            idx = np.flatnonzero(need_hi)
            need_hi[idx[(fh >= 0.0) | stuck]] = False
        if need_lo.any():
            hi[need_lo] = lo[need_lo]
            lo[need_lo] = np.maximum(lo[need_lo] / growth, limit_lo)
            fl = F(lo[need_lo], need_lo)
            stuck = lo[need_lo] <= limit_lo
            idx = np.flatnonzero(need_lo)
            need_lo[idx[(fl <= 0.0) | stuck]] = False
    raise BracketError("could not bracket g(p)")


def _invert_many(family, p, gap_p, b, quad, root):
    """Solve ``g^{-1}(P) = p`` for arrays ``0 < p < b`` (``gap_p = b - p``)."""
    a = family.a
    out = np.empty_like(p)
    tol = max(root.tol, 4.0 * np.finfo(float).eps)
    near = np.zeros(p.shape, dtype=bool) if gap_p is None else p > 0.5 * b

    inner = ~near
    if inner.any():
        pi = p[inner]
        if math.isinf(a):
            def G(P, rows):
                return _ginv_many(family, P, None, quad) - pi[rows]

            def dG(P, rows):
                return family.inv_f(P)

            lo, hi = _expand_many(G, pi.copy(), root.bracket_growth, 0.0, 1e300, root.max_iter)
        else:
            def G(P, rows):
                return _ginv_many(family, P, a - P, quad) - pi[rows]

            def dG(P, rows):
                return family.inv_f(P, a - P)

            lo, hi = np.zeros_like(pi), np.full_like(pi, a)
        x0 = np.clip(pi, lo, hi)
        x0 = np.where((x0 <= lo) | (x0 >= hi), 0.5 * (lo + hi), x0)
        out[inner] = _newton_many(G, dG, x0, lo, hi, tol, root.max_iter)

    if near.any():
        out[near] = _invert_near(family, p[near], gap_p[near], quad, root, tol)
    return out


def _invert_near(family, p, gap, quad, root, tol):
    """Near ``b`` solve for the tail: in ``log P`` (``a = inf``) or ``log(a - P)`` (finite ``a``)."""
    a = family.a
    step = math.log(16.0)
    every = np.ones(p.shape, dtype=bool)
    if math.isinf(a):
        top = math.log(1e300)

        def F(u, rows, g=gap):
            return g[rows] - _tail_many(family, np.exp(u), quad)

        def dF(u, rows):
            P = np.exp(u)
            return P * family.inv_f(P)

        # roots beyond the float range are reported as infinite
        ok = F(np.full(p.shape, top), every) >= 0.0
        res = np.full(p.shape, math.inf)
        if ok.any():
            gk = gap[ok]
            Fk = lambda u, rows: F(u, rows, gk)  # noqa: E731
            u0 = np.log(p[ok])
            lo, hi = _expand_additive(Fk, u0, step, top, root.max_iter)
            res[ok] = np.exp(_newton_many(Fk, dF, np.clip(u0, lo, hi), lo, hi, tol, root.max_iter,
                                            log_scale=True))
        return res

    floor = math.log(1e-17 * a)

    def S(u, rows, g=gap):
        return _edge_many(family, np.exp(u), quad) - g[rows]

    def dS(u, rows):
        s = np.exp(u)
        return s * family.inv_f(a - s, s)

    # distances below a * eps round away: the answer is a itself
    at_a = S(np.full(p.shape, floor), every) >= 0.0
    res = np.full(p.shape, a)
    if (~at_a).any():
        gk = gap[~at_a]
        Sk = lambda u, rows: S(u, rows, gk)  # noqa: E731
        u0 = np.log(np.minimum(gk, 0.5 * a))
        lo, hi = _expand_additive(Sk, u0, step, math.log(a), root.max_iter, floor=floor)
        res[~at_a] = a - np.exp(_newton_many(Sk, dS, np.clip(u0, lo, hi), lo, hi, tol, root.max_iter,
                                                 log_scale=True))
    return res


def _expand_additive(F, x, step, ceiling, max_iter, floor=-math.inf):
    """Brackets for increasing ``F`` by additive steps from ``x`` within ``[floor, ceiling]``."""
    lo = x.copy()
    hi = x.copy()
    rows = np.ones(x.shape, dtype=bool)
    f = F(x, rows)
    need_hi = f < 0.0
    need_lo = f > 0.0
    for _ in range(max_iter):
        if not (need_hi.any() or need_lo.any()):
            return lo, hi
        if need_hi.any():
            lo[need_hi] = hi[need_hi]
            hi[need_hi] = np.minimum(hi[need_hi] + step, ceiling)
            fh = F(hi[need_hi], need_hi)
            idx = np.flatnonzero(need_hi)
            need_hi[idx[(fh >= 0.0) | (hi[need_hi] >= ceiling)]] = False
        if need_lo.any():
            hi[need_lo] = lo[need_lo]
            lo[need_lo] = np.maximum(lo[need_lo] - step, floor)
            fl = F(lo[need_lo], need_lo)
            idx = np.flatnonzero(need_lo)
            need_lo[idx[(fl <= 0.0) | (lo[need_lo] <= floor)]] = False
    raise BracketError("could not bracket g(p)")


def g_eval(
    family: Deformation,
    p,
    quad: QuadratureSpec | None = None,
    root: RootSpec | None = None,
    *,
    b: float | None = None,
    gap=None,
):
    """Momentum ``g(p)``, the inverse of :func:`g_inverse`, for ``|p| < b``.

    Closed forms are used where known; otherwise ``g^{-1}(P) = p`` is solved
    for all points at once by safeguarded Newton iteration on brackets
    (``d g^{-1}/dP = 1/f``).
    ``gap = b - |p|`` improves accuracy next to the bound.  At ``|p| == b``
    (``gap == 0``) the result is ``+-a``.
    """
    quad = quad or QuadratureSpec()
    root = root or RootSpec()
    p = np.asarray(p, dtype=float)
    if b is None:
        b = compute_b(family, quad)
    if gap is not None:
        gap = np.broadcast_to(np.asarray(gap, dtype=float), p.shape)
    absp = np.abs(p)
    if np.any(absp > b) or (gap is None and math.isfinite(b) and np.any(absp >= b)):
        raise DomainError(f"|p| must be below the pseudo-momentum bound b = {b!r}")
    at_edge = gap == 0.0 if gap is not None else np.zeros(p.shape, dtype=bool)
    with np.errstate(divide="ignore", invalid="ignore"):
        closed = family.g_closed(p, gap)
        if closed is not None:
            closed = np.where(at_edge, np.sign(p) * family.a, closed)
    if closed is not None:
        return float(closed) if closed.ndim == 0 else closed

    absp = absp.ravel()
    gflat = None if gap is None else gap.ravel()
    if gflat is None and math.isfinite(b):
        gflat = b - absp
    out = np.zeros_like(absp)
    solve = absp > 0.0
    if gflat is not None:
        out[gflat == 0.0] = family.a
        solve &= gflat > 0.0
    if np.any(solve):
        out[solve] = _invert_many(
            family, absp[solve], None if gflat is None else gflat[solve], b, quad, root
        )
    out = np.sign(p.ravel()) * out
    out = out.reshape(p.shape)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class AlgebraContext:
    """Physical constants, a deformation family and its derived bounds."""

    params: PhysicalParams
    family: Deformation
    b: float
    l0: float

    @classmethod
    def build(
        cls,
        family: Deformation,
        params: PhysicalParams | None = None,
        quad: QuadratureSpec | None = None,
    ) -> "AlgebraContext":
        params = params or PhysicalParams()
        b = compute_b(family, quad)
        l0 = 0.0 if math.isinf(b) else math.pi * params.hbar / (2.0 * b)
        return cls(params, family, b, l0)

    def with_beta(self, beta: float, quad: QuadratureSpec | None = None) -> "AlgebraContext":
        return AlgebraContext.build(self.family.with_beta(beta), self.params, quad)


def minimal_length(ctx: AlgebraContext) -> float:
    """Minimal length ``l0 = pi hbar / (2 b)``, zero when ``b`` is infinite."""
    return 0.0 if math.isinf(ctx.b) else math.pi * ctx.params.hbar / (2.0 * ctx.b)
