import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import gamma, hyp2f1

from deformedqm.algebra import (
    AlgebraContext,
    Custom,
    ExpCbrt,
    ExpSqrt,
    PhysicalParams,
    PolyMinus,
    PolyPlus,
    Undeformed,
    compute_b,
    g_eval,
    g_inverse,
    kempf,
    minimal_length,
)
from deformedqm.errors import DomainError, PreconditionError
from deformedqm.numerics import QuadratureSpec

QUAD = QuadratureSpec(rel_tol=1e-13, abs_tol=1e-15)


def b_polyplus(beta, k):
    return math.sqrt(math.pi) * gamma(k - 0.5) / (2.0 * gamma(k) * math.sqrt(beta))


def b_polyminus(beta, k):
    return hyp2f1(0.5, k, 1.5, 1.0) / math.sqrt(beta)


@pytest.mark.parametrize("k", [0.75, 1.0, 1.5, 2.0, 3.3])
def test_b_polyplus_gamma_oracle(k):
    fam = PolyPlus(0.04, k)
    assert compute_b(fam) == pytest.approx(b_polyplus(0.04, k), rel=1e-11)
    assert compute_b(fam) == pytest.approx(AlgebraContext.build(fam).b, rel=1e-15)


@pytest.mark.parametrize("k", [-2.0, -1.0, 0.0, 0.25, 0.5, 0.75, 0.9])
def test_b_polyminus_hypergeometric_oracle(k):
    fam = PolyMinus(0.04, k)
    # numeric path versus the gamma form of 2F1(1/2, k; 3/2; 1)
    ref = math.sqrt(math.pi) * gamma(1.0 - k) / (2.0 * gamma(1.5 - k)) / math.sqrt(0.04)
    assert compute_b(fam) == pytest.approx(ref, rel=1e-11)
    assert b_polyminus(0.04, k) == pytest.approx(ref, rel=1e-12)


def test_b_exponential_families():
    assert compute_b(ExpSqrt(0.25)) == pytest.approx(2.0, rel=1e-15)
    # int_0^inf exp(-(beta P^2)^(1/3)) dP = Gamma(5/2) / sqrt(beta)
    assert compute_b(ExpCbrt(0.25)) == pytest.approx(gamma(2.5) / 0.5, rel=1e-12)


def test_minimal_length_dichotomy():
    for fam in (kempf(0.1), PolyPlus(0.1, 0.75), PolyMinus(0.1, -1.0), ExpSqrt(0.1), ExpCbrt(0.1)):
        ctx = AlgebraContext.build(fam)
        assert math.isfinite(ctx.b) and minimal_length(ctx) > 0
        assert ctx.l0 == pytest.approx(math.pi / (2.0 * ctx.b))
    ctx = AlgebraContext.build(Undeformed())
    assert math.isinf(ctx.b) and minimal_length(ctx) == 0.0
    ctx = AlgebraContext.build(Custom(lambda P: 1.0 + P * P, minimal_length=False))
    assert ctx.l0 == 0.0


def test_kempf_l0():
    assert AlgebraContext.build(kempf(0.01), PhysicalParams(hbar=2.0)).l0 == pytest.approx(0.2)


def test_custom_matches_builtin():
    custom = Custom(lambda P: (1.0 + 0.3 * P * P) ** 1.5)
    assert compute_b(custom, QUAD) == pytest.approx(compute_b(PolyPlus(0.3, 1.5)), rel=1e-12)


def test_invalid_parameters():
    with pytest.raises(ValueError):
        PolyPlus(0.1, 0.5)
    with pytest.raises(ValueError):
        PolyMinus(0.1, 1.0)
    with pytest.raises(ValueError):
        PolyPlus(-1.0, 1.0)
    with pytest.raises(ValueError):
        PhysicalParams(mass=0.0)
    with pytest.raises(PreconditionError):
        Undeformed().with_beta(0.1)


def test_domain_errors():
    fam = PolyMinus(0.25, 0.5)
    with pytest.raises(DomainError):
        g_inverse(fam, 3.0)
    ctx = AlgebraContext.build(fam)
    with pytest.raises(DomainError):
        g_eval(fam, 1.01 * ctx.b, b=ctx.b)


def test_closed_g_values():
    assert g_eval(kempf(1.0), 0.5) == pytest.approx(math.tan(0.5))
    assert g_eval(PolyMinus(1.0, 0.5), 0.5) == pytest.approx(math.sin(0.5))
    assert g_eval(ExpSqrt(1.0), 0.5) == pytest.approx(math.log(2.0))
    assert g_inverse(PolyMinus(1.0, -1.0), 0.6) == pytest.approx(0.6 - 0.072)


FAMILIES = [
    PolyPlus(0.3, 1.0), PolyPlus(0.3, 1.5), PolyPlus(0.3, 2.0), PolyPlus(0.3, 0.75),
    PolyMinus(0.3, 0.5), PolyMinus(0.3, -1.0), PolyMinus(0.3, 0.25), PolyMinus(0.3, 0.75),
    ExpSqrt(0.3), ExpCbrt(0.3),
]
BS = {fam: compute_b(fam) for fam in FAMILIES}


@settings(max_examples=25, deadline=None)
@given(st.sampled_from(FAMILIES), st.floats(0.001, 0.97))
def test_g_round_trip_and_oddness(fam, frac):
    b = BS[fam]
    p = frac * b
    P = g_eval(fam, p, QUAD, b=b, gap=b - p)
    assert g_eval(fam, -p, QUAD, b=b, gap=b - p) == -P
    assert g_inverse(fam, P, QUAD) == pytest.approx(p, rel=1e-11)


@settings(max_examples=25, deadline=None)
@given(st.sampled_from(FAMILIES), st.floats(0.05, 20.0))
def test_g_inverse_monotone_and_bounded(fam, P):
    P = min(P, 0.999 * fam.a)
    x = g_inverse(fam, np.array([0.5 * P, P]), QUAD)
    assert 0.0 < x[0] < x[1] < BS[fam]
    assert g_inverse(fam, -P, QUAD) == pytest.approx(-x[1], rel=1e-14)


def test_g_near_bound_uses_gap():
    fam = PolyMinus(0.3, 0.25)
    b = BS[fam]
    P = g_eval(fam, b - 1e-6, QUAD, b=b, gap=1e-6)
    assert 0.0 < fam.a - P < 1e-6
    assert g_inverse(fam, P, QUAD, gap=fam.a - P) == pytest.approx(b - 1e-6, rel=1e-14)
    assert g_eval(fam, b, QUAD, b=b, gap=0.0) == fam.a


def test_vectorized_g_matches_scalar():
    fam = ExpCbrt(0.3)
    b = BS[fam]
    p = np.linspace(-0.9, 0.9, 7) * b
    vec = g_eval(fam, p, QUAD, b=b)
    for x, v in zip(p, vec):
        assert g_eval(fam, x, QUAD, b=b) == pytest.approx(v, rel=1e-14)
