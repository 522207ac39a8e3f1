import math

import numpy as np
import pytest

from deformedqm.algebra import AlgebraContext, ExpCbrt, ExpSqrt, PhysicalParams, PolyMinus, PolyPlus, Undeformed
from deformedqm.eigenfunctions import (
    Kernel,
    bound_state,
    chebyshev_samples,
    eval_state,
    full_integral,
    integral_equation_residual,
    normalization,
    partial_integral,
    phase,
    state_norm,
)
from deformedqm.errors import PreconditionError
from deformedqm.numerics import QuadratureSpec, RootSpec, integrate
from deformedqm.spectrum import EnergyLevel, ExtensionParam, quantization_integral, solve_level

QUAD = QuadratureSpec(rel_tol=1e-13, abs_tol=1e-15)
ROOT = RootSpec(tol=1e-14)


def test_undeformed_phase_oracle():
    ctx = AlgebraContext.build(Undeformed())
    for q, p in ((1.0, 0.7), (0.3, 2.0), (2.0, -5.0)):
        assert phase(ctx, q, p, QUAD) == pytest.approx(2.0 / q * math.atan(p / q), rel=1e-13)


def test_undeformed_normalization_oracle():
    ctx = AlgebraContext.build(Undeformed())
    assert normalization(ctx, 1.0, QUAD) == pytest.approx(math.sqrt(2.0 / math.pi), rel=1e-13)
    # C scales as q^(3/2)
    assert normalization(ctx, 4.0, QUAD) == pytest.approx(8.0 * math.sqrt(2.0 / math.pi), rel=1e-13)


def test_undeformed_has_no_bound_state_object():
    ctx = AlgebraContext.build(Undeformed())
    lvl = solve_level(ctx, 0, ExtensionParam(0.5))
    with pytest.raises(PreconditionError):
        bound_state(ctx, lvl)


def test_kernel_step_convention():
    k = Kernel(0.0, 1.0, 1.0)
    assert k(0.0, 1.0) == pytest.approx(-0.5j)
    assert k(1.0, 0.0) == pytest.approx(0.5j)
    assert k(0.3, 0.3) == 0.0
    assert Kernel.for_extension(ExtensionParam(0.25), PhysicalParams()).A == pytest.approx(1.0)


@pytest.fixture(scope="module", params=[PolyPlus(0.05, 1.0), PolyMinus(0.05, 0.75), ExpSqrt(0.05), ExpCbrt(0.05)],
                ids=lambda f: f.label())
def solved(request):
    ctx = AlgebraContext.build(request.param, PhysicalParams(), QUAD)
    ext = ExtensionParam(0.3)
    lvl = solve_level(ctx, 1, ext, QUAD, ROOT)
    return ctx, ext, lvl, bound_state(ctx, lvl, QUAD, ROOT)


def test_phase_matches_quantization_integral(solved):
    ctx, ext, lvl, st = solved
    Phi = quantization_integral(ctx, lvl.q, QUAD)
    assert st.phase_b == pytest.approx(Phi, rel=1e-13)
    assert phase(ctx, lvl.q, ctx.b, QUAD, ROOT) == pytest.approx(Phi, rel=1e-13)
    assert phase(ctx, lvl.q, -0.4 * ctx.b, QUAD, ROOT) == pytest.approx(float(st.phase_fn(-0.4 * ctx.b)), rel=1e-12)


def test_norm_and_symmetry(solved):
    ctx, ext, lvl, st = solved
    assert state_norm(st) == pytest.approx(1.0, abs=1e-12)
    p = np.linspace(0.0, ctx.b, 9)
    np.testing.assert_allclose(eval_state(st, -p), np.conj(eval_state(st, p)), rtol=1e-13, atol=1e-300)
    np.testing.assert_allclose(np.abs(eval_state(st, p)), st.modulus(p), rtol=1e-13)


def test_full_integral_identity(solved):
    ctx, ext, lvl, st = solved
    val, closed = full_integral(st, QUAD)
    assert abs(val - closed) <= 1e-12 * st.C
    assert partial_integral(st, ctx.b, QUAD) == pytest.approx(val, abs=1e-12 * st.C)


def test_partial_integral_against_direct_quadrature(solved):
    ctx, ext, lvl, st = solved
    # interior interval split at p = 0, where the exponential families have a cusp in f
    p1, p2 = -0.7 * ctx.b, 0.2 * ctx.b
    direct = sum(integrate(lambda x: eval_state(st, x), lo, hi, QUAD).value for lo, hi in ((p1, 0.0), (0.0, p2)))
    diff = partial_integral(st, p2, QUAD) - partial_integral(st, p1, QUAD)
    assert diff == pytest.approx(direct, abs=1e-12 * st.C)


def test_residual_small_and_sensitive(solved):
    ctx, ext, lvl, st = solved
    res = integral_equation_residual(st, ext)
    assert res <= 1e-10 * abs(lvl.E)
    off = EnergyLevel(lvl.n, ext, 1.01 * lvl.q, -(1.01 * lvl.q) ** 2 / 2)
    assert integral_equation_residual(bound_state(ctx, off, QUAD, ROOT), ext) > 1e3 * res
    # the same state with another extension parameter fails the equation
    assert integral_equation_residual(st, ExtensionParam(0.6)) > 1e-2 * abs(lvl.E)


def test_delta_zero_residual():
    ctx = AlgebraContext.build(PolyPlus(0.05, 1.0))
    ext = ExtensionParam(0.0)
    lvl = solve_level(ctx, 1, ext, QUAD, ROOT)
    assert integral_equation_residual(bound_state(ctx, lvl, QUAD, ROOT), ext) < 1e-12


def test_eval_out_of_range(solved):
    ctx, ext, lvl, st = solved
    with pytest.raises(PreconditionError):
        eval_state(st, 1.5 * ctx.b)


def test_chebyshev_samples():
    s = chebyshev_samples(2.0, 21)
    assert s.shape == (21,) and np.all(np.diff(s) > 0) and np.all(np.abs(s) < 2.0)
    assert s[10] == pytest.approx(0.0, abs=1e-15)
