"""Quadrature and root-finding kernels with explicit tolerance contracts.

Integrals are computed by double-exponential quadrature: tanh-sinh on finite
intervals and exp-sinh on semi-infinite ones.  Both tolerate integrable
algebraic endpoint singularities.  When an integrand is singular at an
endpoint, pass ``gaps=True`` so it receives the distances to both endpoints
computed without cancellation; otherwise nodes closer to an endpoint than the
floating point resolution are dropped and roughly ``sqrt(eps)`` of mass can be
lost for ``(hi - x)**-0.5`` type behaviour.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, NamedTuple

import numpy as np
from numpy.polynomial import chebyshev as npcheb
from scipy.optimize import brentq

from .errors import BracketError, QuadratureError, RootFindingError

__all__ = [
    "QuadratureSpec",
    "RootSpec",
    "Quad",
    "integrate",
    "integrate_many",
    "solve_root",
    "newton_bracketed",
    "ChebyshevPanels",
]

_HALF_PI = 0.5 * math.pi
_EPS = np.finfo(float).eps

# tanh-sinh: keep nodes whose endpoint distance is above ~1e-300 (t <= 6.08)
_TS_TMAX = 6.0
# exp-sinh: x - lo spans [e^-690, e^276]
_ES_VMIN = -690.0
_ES_VMAX = 276.0
_MIN_LEVELS = 3


@dataclass(frozen=True)
class QuadratureSpec:
    """Tolerances and level budget for :func:`integrate`."""

    rel_tol: float = 1e-12
    abs_tol: float = 1e-14
    max_levels: int = 12

    def __post_init__(self):
        for name in ("rel_tol", "abs_tol"):
            v = getattr(self, name)
            if not (0.0 < v < 1.0):
                raise ValueError(f"{name} must lie in (0, 1), got {v!r}")
        if int(self.max_levels) != self.max_levels or self.max_levels < _MIN_LEVELS:
            raise ValueError(f"max_levels must be an integer >= {_MIN_LEVELS}")


@dataclass(frozen=True)
class RootSpec:
    """Tolerance and budgets for :func:`solve_root`.

    ``tol`` is a relative tolerance on the root location.
    """

    tol: float = 1e-12
    max_iter: int = 200
    bracket_growth: float = 2.0

    def __post_init__(self):
        if not self.tol > 0.0:
            raise ValueError("tol must be positive")
        if int(self.max_iter) != self.max_iter or self.max_iter < 10:
            raise ValueError("max_iter must be an integer >= 10")
        if not self.bracket_growth > 1.0:
            raise ValueError("bracket_growth must exceed 1")


class Quad(NamedTuple):
    value: float | complex
    error: float


# ---------------------------------------------------------------------------
# node tables


def _readonly(*arrays):
    for a in arrays:
        a.setflags(write=False)
    return arrays


@lru_cache(maxsize=None)
def _tanh_sinh_nodes(level: int):
    """New nodes of ``level`` for t >= 0.

    Returns ``(s, w)`` where ``s = 1 - tanh(pi/2 sinh t)`` is the scaled
    distance of the right node to the upper endpoint (the left node mirrors
    it) and ``w`` the weight for unit half-width and unit step.
    """
    h = 2.0**-level
    kmax = int(math.ceil(_TS_TMAX / h))
    k = np.arange(0, kmax + 1) if level == 0 else np.arange(1, kmax + 1, 2)
    t = k * h
    u = _HALF_PI * np.sinh(t)
    e = np.exp(-2.0 * u)
    s = 2.0 * e / (1.0 + e)
    w = _HALF_PI * np.cosh(t) * s * (2.0 - s)
    return _readonly(s, w)


@lru_cache(maxsize=None)
def _exp_sinh_nodes(level: int):
    """New nodes of ``level``: ``(v, w)`` with ``x - lo = exp(v)``."""
    h = 2.0**-level
    tmin = math.asinh(_ES_VMIN / _HALF_PI)
    tmax = math.asinh(_ES_VMAX / _HALF_PI)
    k = np.arange(math.ceil(tmin / h), math.floor(tmax / h) + 1)
    if level > 0:
        k = k[k % 2 != 0]
    t = k * h
    v = _HALF_PI * np.sinh(t)
    w = _HALF_PI * np.cosh(t) * np.exp(v)
    return _readonly(v, w)


# ---------------------------------------------------------------------------
# quadrature


def _check_finite(vals):
    if not np.all(np.isfinite(vals)):
        raise QuadratureError("integrand returned NaN or infinity at an interior node")


def _converge(level_sums, spec: QuadratureSpec, what: str) -> Quad:
    """Drive ``level_sums`` (generator of (estimate, abs_mass)) to tolerance."""
    prev = None
    for level, (est, mass) in enumerate(level_sums):
        if prev is not None:
            diff = abs(est - prev)
            rounding = 10.0 * _EPS * mass
            err = diff + rounding
            if level >= _MIN_LEVELS - 1 and err <= max(spec.abs_tol, spec.rel_tol * abs(est)):
                return Quad(est, err)
        prev = est
        if level + 1 >= spec.max_levels:
            break
    raise QuadratureError(
        f"{what} quadrature did not converge within {spec.max_levels} levels"
    )


def _tanh_sinh(fn, lo, hi, spec, gaps):
    d = 0.5 * (hi - lo)

    def sums():
        total = 0.0
        mass = 0.0
        for level in range(spec.max_levels):
            s, w = _tanh_sinh_nodes(level)
            ds = d * s
            xr = hi - ds
            xl = lo + ds
            if gaps:
                keep = ds > 0.0
                ds, w_, xr, xl = ds[keep], w[keep], xr[keep], xl[keep]
                # the centre node (s == 1) gets both distances equal to d
                fr = fn(xr, 2.0 * d - ds, ds)
                fl = fn(xl, ds, 2.0 * d - ds)
            else:
                keep_r = xr < hi
                keep_l = xl > lo
                w_ = w
                fr = np.zeros(len(s), dtype=np.result_type(float))
                fl = np.zeros(len(s), dtype=np.result_type(float))
                vr = np.asarray(fn(xr[keep_r]))
                vl = np.asarray(fn(xl[keep_l]))
                if np.iscomplexobj(vr) or np.iscomplexobj(vl):
                    fr = fr.astype(complex)
                    fl = fl.astype(complex)
                fr[keep_r] = vr
                fl[keep_l] = vl
            fr = np.asarray(fr)
            fl = np.asarray(fl)
            _check_finite(fr)
            _check_finite(fl)
            if level == 0:
                # first entry is t = 0, where xr == xl == c; count once
                contrib = w_[0] * fr[0] + np.sum(w_[1:] * (fr[1:] + fl[1:]))
                amass = w_[0] * abs(fr[0]) + np.sum(w_[1:] * (np.abs(fr[1:]) + np.abs(fl[1:])))
            else:
                contrib = np.sum(w_ * (fr + fl))
                amass = np.sum(w_ * (np.abs(fr) + np.abs(fl)))
            total = total + contrib
            mass += amass
            h = 2.0**-level
            yield d * h * total, d * h * mass

    return _converge(sums(), spec, "tanh-sinh")


def _exp_sinh(fn, lo, spec, gaps):
    def sums():
        total = 0.0
        mass = 0.0
        for level in range(spec.max_levels):
            v, w = _exp_sinh_nodes(level)
            off = np.exp(v)
            x = lo + off
            if gaps:
                vals = np.asarray(fn(x, off, np.full_like(x, np.inf)))
            else:
                keep = x > lo
                vals = np.zeros(len(x))
                got = np.asarray(fn(x[keep]))
                if np.iscomplexobj(got):
                    vals = vals.astype(complex)
                vals[keep] = got
            _check_finite(vals)
            total = total + np.sum(w * vals)
            mass += np.sum(w * np.abs(vals))
            h = 2.0**-level
            yield h * total, h * mass

    return _converge(sums(), spec, "exp-sinh")


def integrate(
    fn: Callable,
    lo: float,
    hi: float,
    spec: QuadratureSpec | None = None,
    *,
    gaps: bool = False,
) -> Quad:
    """Integrate ``fn`` over ``[lo, hi]``; either limit may be infinite.

    ``fn`` must accept numpy arrays.  With ``gaps=True`` it is called as
    ``fn(x, x - lo, hi - x)`` where both distances are accurate to full
    relative precision even next to the endpoints (``inf`` for an infinite
    limit).  Returns ``Quad(value, error)``.

    Raises :class:`QuadratureError` on non-convergence or when the integrand
    yields NaN/inf at a node.
    """
    spec = spec or QuadratureSpec()
    with np.errstate(over="ignore", under="ignore"):
        return _integrate(fn, float(lo), float(hi), spec, gaps)


def _integrate(fn, lo, hi, spec, gaps):
    if math.isnan(lo) or math.isnan(hi):
        raise ValueError("integration limits must not be NaN")
    if lo == hi:
        return Quad(0.0, 0.0)
    if lo > hi:
        r = integrate(fn, hi, lo, spec, gaps=gaps)
        return Quad(-r.value, r.error)

    if math.isinf(lo) and math.isinf(hi):
        if gaps:
            right = integrate(lambda x, a, b: fn(x, a + np.inf, b), 0.0, np.inf, spec, gaps=True)
            left = integrate(lambda y, a, b: fn(-y, b, a + np.inf), 0.0, np.inf, spec, gaps=True)
        else:
            right = integrate(fn, 0.0, np.inf, spec)
            left = integrate(lambda y: fn(-y), 0.0, np.inf, spec)
        return Quad(right.value + left.value, right.error + left.error)
    if math.isinf(lo):
        if gaps:
            return _exp_sinh(lambda y, a, b: fn(-y, b, a), -hi, spec, True)
        return _exp_sinh(lambda y: fn(-y), -hi, spec, False)
    if math.isinf(hi):
        return _exp_sinh(fn, lo, spec, gaps)
    return _tanh_sinh(fn, lo, hi, spec, gaps)


def integrate_many(
    fn: Callable,
    lo,
    hi,
    spec: QuadratureSpec | None = None,
) -> np.ndarray:
    """Integrals of one integrand over many intervals ``[lo_i, hi_i]`` at once.

    The vectorized counterpart of ``integrate(..., gaps=True)``: ``fn`` is
    called with 2-D arrays ``(x, x - lo, hi - x)``, one row per interval.
    ``lo`` must be finite and below ``hi``; ``hi`` may be ``inf`` (all or
    none).  Each row must converge to ``spec``; the level loop continues
    until every row has.
    """
    spec = spec or QuadratureSpec()
    lo = np.atleast_1d(np.asarray(lo, dtype=float))
    hi = np.broadcast_to(np.asarray(hi, dtype=float), lo.shape).copy()
    if lo.ndim != 1 or not np.all(np.isfinite(lo)) or not np.all(lo < hi):
        raise ValueError("integrate_many needs finite lo below hi")
    infinite = np.isinf(hi)
    if infinite.any() and not infinite.all():
        raise ValueError("integrate_many needs hi all finite or all infinite")
    # masked nodes at zero distance may divide by zero; they are dropped
    with np.errstate(over="ignore", under="ignore", divide="ignore", invalid="ignore"):
        if infinite.all():
            return _exp_sinh_many(fn, lo, spec)
        return _tanh_sinh_many(fn, lo, hi, spec)


def _converge_many(level_sums, n, spec, what):
    prev = None
    for level, (est, mass) in enumerate(level_sums):
        if prev is not None and level >= _MIN_LEVELS - 1:
            err = np.abs(est - prev) + 10.0 * _EPS * mass
            if np.all(err <= np.maximum(spec.abs_tol, spec.rel_tol * np.abs(est))):
                return est
        prev = est
        if level + 1 >= spec.max_levels:
            break
    raise QuadratureError(f"{what} quadrature did not converge within {spec.max_levels} levels")


def _tanh_sinh_many(fn, lo, hi, spec):
    d = (0.5 * (hi - lo))[:, None]
    lo2 = lo[:, None]
    hi2 = hi[:, None]

    def sums():
        total = np.zeros(len(lo))
        mass = np.zeros(len(lo))
        for level in range(spec.max_levels):
            s, w = _tanh_sinh_nodes(level)
            ds = d * s[None, :]
            far = 2.0 * d - ds
            fr = np.asarray(fn(hi2 - ds, far, ds), dtype=float)
            fl = np.asarray(fn(lo2 + ds, ds, far), dtype=float)
            # nodes whose distance underflowed carry no mass
            fr = np.where(ds > 0.0, fr, 0.0)
            fl = np.where(ds > 0.0, fl, 0.0)
            _check_finite(fr)
            _check_finite(fl)
            if level == 0:
                fl[:, 0] = 0.0  # the centre node is counted once
            total = total + (fr + fl) @ w
            mass = mass + (np.abs(fr) + np.abs(fl)) @ w
            h = 2.0**-level
            yield d[:, 0] * h * total, d[:, 0] * h * mass

    return _converge_many(sums(), len(lo), spec, "tanh-sinh")


def _exp_sinh_many(fn, lo, spec):
    lo2 = lo[:, None]

    def sums():
        total = np.zeros(len(lo))
        mass = np.zeros(len(lo))
        for level in range(spec.max_levels):
            v, w = _exp_sinh_nodes(level)
            off = np.broadcast_to(np.exp(v)[None, :], (len(lo), len(v)))
            vals = np.asarray(fn(lo2 + off, off, np.full(off.shape, np.inf)), dtype=float)
            _check_finite(vals)
            total = total + vals @ w
            mass = mass + np.abs(vals) @ w
            h = 2.0**-level
            yield h * total, h * mass

    return _converge_many(sums(), len(lo), spec, "exp-sinh")


# ---------------------------------------------------------------------------
# root finding


def _call(fn, x):
    try:
        y = float(fn(x))
    except OverflowError as exc:
        raise BracketError(f"function overflowed at x={x!r}") from exc
    if math.isnan(y):
        raise RootFindingError(f"function returned NaN at x={x!r}")
    return y


def _expand_bracket(fn, seed, spec, domain):
    g = spec.bracket_growth
    f0 = _call(fn, seed)
    if f0 == 0.0:
        return seed, seed, f0, f0
    step = max(abs(seed), 1.0)
    up, f_up_prev = seed, f0
    dn, f_dn_prev = seed, f0
    for i in range(1, spec.max_iter + 1):
        # alternate outward probes on both sides of the seed
        if domain == "positive":
            x_up, x_dn = seed * g**i, seed / g**i
        else:
            x_up, x_dn = seed + step * (g**i - 1.0), seed - step * (g**i - 1.0)
        f_up = _call(fn, x_up)
        if f_up == 0.0 or (f_up > 0) != (f0 > 0):
            return up, x_up, f_up_prev, f_up
        f_dn = _call(fn, x_dn)
        if f_dn == 0.0 or (f_dn > 0) != (f0 > 0):
            return x_dn, dn, f_dn, f_dn_prev
        up, f_up_prev = x_up, f_up
        dn, f_dn_prev = x_dn, f_dn
    raise BracketError(
        f"no sign change found around seed {seed!r} after {spec.max_iter} expansions"
    )


def solve_root(
    fn: Callable[[float], float],
    seed: float,
    spec: RootSpec | None = None,
    *,
    domain: str | None = None,
) -> float:
    """Root of a monotone scalar function, searched outward from ``seed``.

    The bracket grows geometrically from ``seed`` (multiplicatively when
    ``domain == "positive"``, the default for positive seeds; additively for
    ``domain == "real"``) until the sign changes, then Brent's
    bisection/secant hybrid refines the root to ``spec.tol`` relative
    accuracy.  Deterministic: identical inputs give bit-identical results.
    """
    spec = spec or RootSpec()
    seed = float(seed)
    if domain is None:
        domain = "positive" if seed > 0 else "real"
    if domain not in ("positive", "real"):
        raise ValueError(f"unknown domain {domain!r}")
    if domain == "positive" and not seed > 0:
        raise ValueError("a positive-domain search needs a positive seed")

    a, b, fa, fb = _expand_bracket(fn, seed, spec, domain)
    if fa == 0.0:
        return a
    if fb == 0.0:
        return b
    rtol = max(spec.tol, 4.0 * _EPS)
    try:
        x, info = brentq(
            lambda x: _call(fn, x), a, b, xtol=1e-300, rtol=rtol,
            maxiter=spec.max_iter, full_output=True, disp=False,
        )
    except ValueError as exc:  # pragma: no cover - brentq re-checks the bracket
        raise RootFindingError(str(exc)) from exc
    if not info.converged:
        raise RootFindingError(f"Brent iteration did not converge: {info.flag}")
    return float(x)


def newton_bracketed(
    fn: Callable[[float], float],
    dfn: Callable[[float], float],
    lo: float,
    hi: float,
    spec: RootSpec | None = None,
    x0: float | None = None,
) -> float:
    """Safeguarded Newton iteration on a bracket ``[lo, hi]`` with a sign change.

    Steps leaving the current bracket are replaced by bisection, so the
    iteration never diverges.  Used where the derivative is free (inverting
    ``g^-1`` whose derivative is ``1/f``).
    """
    spec = spec or RootSpec()
    flo, fhi = _call(fn, lo), _call(fn, hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if (flo > 0) == (fhi > 0):
        raise BracketError(f"no sign change on [{lo!r}, {hi!r}]")
    x = 0.5 * (lo + hi) if x0 is None or not lo < x0 < hi else float(x0)
    tol = max(spec.tol, 4.0 * _EPS)
    for _ in range(spec.max_iter):
        fx = _call(fn, x)
        if fx == 0.0:
            return x
        if (fx > 0) == (flo > 0):
            lo, flo = x, fx
        else:
            hi = x
        d = float(dfn(x))
        x_new = x - fx / d if d != 0.0 and math.isfinite(d) else None
        if x_new is None or not lo < x_new < hi:
            x_new = 0.5 * (lo + hi)
        if abs(x_new - x) <= tol * abs(x_new) or hi - lo <= tol * max(abs(lo), abs(hi)):
            return x_new
        x = x_new
    raise RootFindingError("safeguarded Newton iteration exhausted max_iter")


# ---------------------------------------------------------------------------
# piecewise Chebyshev cache


@lru_cache(maxsize=None)
def _cheb_tables(n: int):
    theta = math.pi * (np.arange(n) + 0.5) / n
    nodes = np.cos(theta)
    k = np.arange(n)
    mat = (2.0 / n) * np.cos(np.outer(k, theta))
    mat[0] *= 0.5
    return _readonly(nodes, mat)


def _clenshaw(t, coef):
    """Evaluate rows of ``coef`` (len(t), n) at ``t`` elementwise."""
    n = coef.shape[1]
    b1 = np.zeros_like(coef[:, 0])
    b2 = np.zeros_like(coef[:, 0])
    for k in range(n - 1, 0, -1):
        b1, b2 = 2.0 * t * b1 - b2 + coef[:, k], b1
    return t * b1 - b2 + coef[:, 0]


class ChebyshevPanels:
    """Adaptive piecewise Chebyshev interpolant of a vectorized function.

    Panels are bisected until the trailing coefficients fall below
    ``tol`` times the largest sampled magnitude.  Supports complex values,
    evaluation and cumulative integration.
    """

    def __init__(self, breaks: np.ndarray, coeffs: np.ndarray, error: float = 0.0):
        self.breaks = np.asarray(breaks, dtype=float)
        self.coeffs = np.asarray(coeffs)
        self.error = float(error)
        _readonly(self.breaks, self.coeffs)

    @property
    def lo(self) -> float:
        return float(self.breaks[0])

    @property
    def hi(self) -> float:
        return float(self.breaks[-1])

    @classmethod
    def fit(cls, fn, lo, hi, *, tol=1e-13, degree=32, initial=8, max_panels=20000):
        nodes, mat = _cheb_tables(degree)
        pending = list(zip(np.linspace(lo, hi, initial + 1)[:-1], np.linspace(lo, hi, initial + 1)[1:]))
        done = []
        scale = 0.0
        err = 0.0
        min_width = 64.0 * _EPS * max(abs(lo), abs(hi), hi - lo)
        while pending:
            a = np.array([p[0] for p in pending])
            b = np.array([p[1] for p in pending])
            x = 0.5 * (a + b)[:, None] + 0.5 * (b - a)[:, None] * nodes[None, :]
            vals = np.asarray(fn(x.ravel())).reshape(x.shape)
            if not np.all(np.isfinite(vals)):
                raise QuadratureError("cached function returned NaN or infinity")
            coef = vals @ mat.T
            scale = max(scale, float(np.max(np.abs(vals))))
            tail = np.max(np.abs(coef[:, -3:]), axis=1)
            nxt = []
            for i in range(len(pending)):
                width = b[i] - a[i]
                if tail[i] <= tol * scale or width <= min_width:
                    done.append((a[i], b[i], coef[i]))
                    err = max(err, float(tail[i]))
                else:
                    m = 0.5 * (a[i] + b[i])
                    nxt.extend([(a[i], m), (m, b[i])])
            if len(done) + len(nxt) > max_panels:
                raise QuadratureError("Chebyshev cache exceeded its panel budget")
            pending = nxt
        done.sort(key=lambda r: r[0])
        breaks = np.array([r[0] for r in done] + [done[-1][1]])
        coeffs = np.array([r[2] for r in done])
        return cls(breaks, coeffs, err)

    def _locate(self, x):
        idx = np.searchsorted(self.breaks, x, side="right") - 1
        idx = np.clip(idx, 0, len(self.coeffs) - 1)
        a = self.breaks[idx]
        b = self.breaks[idx + 1]
        t = (2.0 * x - a - b) / (b - a)
        return idx, np.clip(t, -1.0, 1.0)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if np.any((x < self.lo) | (x > self.hi)):
            raise ValueError("evaluation point outside the cached interval")
        flat = x.ravel()
        idx, t = self._locate(flat)
        return _clenshaw(t, self.coeffs[idx]).reshape(x.shape)

    def antiderivative(self) -> "ChebyshevPanels":
        """Antiderivative that vanishes at ``lo``."""
        half = 0.5 * np.diff(self.breaks)
        ic = npcheb.chebint(self.coeffs, lbnd=-1, axis=1) * half[:, None]
        ends = np.sum(ic, axis=1)  # value at t = 1 since T_k(1) = 1
        offsets = np.concatenate([[0.0], np.cumsum(ends)[:-1]])
        ic[:, 0] = ic[:, 0] + offsets
        return ChebyshevPanels(self.breaks, ic, self.error * (self.hi - self.lo))

    def integral(self):
        half = 0.5 * np.diff(self.breaks)
        ic = npcheb.chebint(self.coeffs, lbnd=-1, axis=1)
        return np.sum(np.sum(ic, axis=1) * half)
