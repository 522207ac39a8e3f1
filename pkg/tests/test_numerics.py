import math

import numpy as np
import pytest

from deformedqm.errors import QuadratureError, RootFindingError
from deformedqm.numerics import (
    ChebyshevPanels,
    QuadratureSpec,
    RootSpec,
    integrate,
    integrate_many,
    newton_bracketed,
    solve_root,
)


def test_finite_interval_polynomial():
    assert integrate(lambda x: x**3 - x, 0.0, 2.0).value == pytest.approx(2.0, rel=1e-13)


def test_endpoint_singularity_with_gaps():
    # int_0^1 (1 - x)^(-1/2) dx = 2, needs the cancellation-free distance
    val = integrate(lambda x, dlo, dhi: dhi**-0.5, 0.0, 1.0, gaps=True).value
    assert val == pytest.approx(2.0, rel=1e-13)


def test_semi_infinite():
    val = integrate(lambda x: 1.0 / (1.0 + x * x), 0.0, math.inf).value
    assert val == pytest.approx(math.pi / 2, rel=1e-13)


def test_doubly_infinite_gaussian():
    val = integrate(lambda x: np.exp(-x * x), -math.inf, math.inf).value
    assert val == pytest.approx(math.sqrt(math.pi), rel=1e-13)


def test_reversed_limits_change_sign():
    a = integrate(np.cos, 0.0, 1.0).value
    b = integrate(np.cos, 1.0, 0.0).value
    assert b == pytest.approx(-a, rel=1e-15)


def test_nan_integrand_raises():
    with pytest.raises(QuadratureError):
        integrate(lambda x: np.full_like(x, np.nan), 0.0, 1.0)


def test_nonconvergence_raises():
    with pytest.raises(QuadratureError):
        integrate(lambda x: np.sin(1.0 / np.maximum(x, 1e-300)), 0.0, 1.0, QuadratureSpec(max_levels=4))


def test_integrate_many_matches_scalar():
    hi = np.array([0.5, 1.0, 3.0])
    vals = integrate_many(lambda x, dlo, dhi: np.exp(-x), np.zeros(3), hi, QuadratureSpec())
    np.testing.assert_allclose(vals, -np.expm1(-hi), rtol=1e-13)


def test_integrate_many_infinite():
    vals = integrate_many(lambda x, dlo, dhi: np.exp(-x), np.array([0.0, 1.0]), np.full(2, math.inf),
                          QuadratureSpec())
    np.testing.assert_allclose(vals, [1.0, math.exp(-1.0)], rtol=1e-13)


def test_spec_validation():
    with pytest.raises(ValueError):
        QuadratureSpec(rel_tol=0.0)
    with pytest.raises(ValueError):
        RootSpec(tol=-1.0)


def test_solve_root_positive_domain():
    r = solve_root(lambda x: x**3 - 1000.0, 1.0, RootSpec(tol=1e-14), domain="positive")
    assert r == pytest.approx(10.0, rel=1e-13)


def test_solve_root_real_domain():
    r = solve_root(lambda x: x + 5.0, 0.0, domain="real")
    assert r == pytest.approx(-5.0, abs=1e-12)


def test_solve_root_unbracketable():
    with pytest.raises(RootFindingError):
        solve_root(lambda x: x * x + 1.0, 1.0, RootSpec(max_iter=20), domain="real")


def test_newton_bracketed():
    r = newton_bracketed(lambda x: x * x - 2.0, lambda x: 2.0 * x, 0.0, 2.0, x0=1.0)
    assert r == pytest.approx(math.sqrt(2.0), rel=1e-14)


def test_chebyshev_panels_antiderivative():
    cp = ChebyshevPanels.fit(np.cos, 0.0, 3.0, tol=1e-14)
    x = np.linspace(0.0, 3.0, 7)
    np.testing.assert_allclose(cp(x), np.cos(x), atol=1e-13)
    np.testing.assert_allclose(cp.antiderivative()(x), np.sin(x), atol=1e-13)
    assert cp.integral() == pytest.approx(math.sin(3.0), rel=1e-13)
