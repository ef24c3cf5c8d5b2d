"""Smooth oracles: FD fallbacks, symmetry, and the extended-Hessian residual."""

import numpy as np
import pytest

from varcalc.expr import Abs, Add, Const, Mul, Var, from_obj
from varcalc.oracles import SmoothMap, SmoothOracle, extended_hessian_residual

from test_expr import _random_smooth


# ---------------------------------------------------------------------------
# finite-difference fallback vs symbolic gradients
# ---------------------------------------------------------------------------

def test_fd_fallback_matches_symbolic_gradient_on_random_smooth_exprs():
    rng = np.random.default_rng(31415)
    checked = 0
    while checked < 100:
        n = int(rng.integers(1, 5))
        expr = _random_smooth(rng, n, int(rng.integers(1, 4)))
        x = rng.uniform(-1.5, 1.5, size=n)
        _, sym = expr.eval_grad(x)
        scale = np.linalg.norm(sym)
        if scale > 1e4:
            continue
        fd_oracle = SmoothOracle(n, lambda z, e=expr: float(e.eval(z)))
        fd = fd_oracle.gradient(x)
        assert fd == pytest.approx(sym, rel=1e-5, abs=1e-6)
        checked += 1


def test_fd_hessian_is_exactly_symmetric():
    rng = np.random.default_rng(6)
    for _ in range(20):
        n = int(rng.integers(2, 5))
        expr = _random_smooth(rng, n, 3)
        x = rng.uniform(-1.0, 1.0, size=n)
        orc = SmoothOracle(n, lambda z, e=expr: float(e.eval(z)))
        H = orc.hessian(x)
        assert np.array_equal(H, H.T)


def test_supplied_derivatives_take_precedence_over_fd():
    marker = np.array([42.0, -7.0])
    orc = SmoothOracle(
        2,
        lambda x: float(x @ x),
        grad_fn=lambda x: marker,
    )
    assert np.array_equal(orc.gradient(np.ones(2)), marker)


def test_from_expr_wires_symbolic_gradient():
    e = from_obj(["+", ["*", ["sin", ["x", 0]], ["x", 1]], ["pow", ["x", 0], 2]])
    orc = SmoothOracle.from_expr(e, 2)
    x = np.array([0.7, -1.2])
    expect = np.array([np.cos(0.7) * (-1.2) + 1.4, np.sin(0.7)])
    assert orc.gradient(x) == pytest.approx(expect, rel=1e-12)
    # Hessian comes from differencing the symbolic gradient; still symmetric
    H = orc.hessian(x)
    assert np.array_equal(H, H.T)
    assert H[0, 1] == pytest.approx(np.cos(0.7), rel=1e-5)


def test_quadratic_constructor_is_exact():
    Q = np.array([[2.0, 0.5], [0.5, 1.0]])
    c = np.array([1.0, -3.0])
    orc = SmoothOracle.quadratic(Q, c, const=4.0)
    x = np.array([0.3, -0.7])
    assert orc.value(x) == pytest.approx(0.5 * x @ Q @ x + c @ x + 4.0)
    assert orc.gradient(x) == pytest.approx(Q @ x + c)
    assert orc.hessian(x) == pytest.approx(Q)


# ---------------------------------------------------------------------------
# SmoothMap
# ---------------------------------------------------------------------------

def test_smooth_map_jacobian_rows_are_component_gradients():
    e0 = from_obj(["*", ["x", 0], ["x", 1]])
    e1 = from_obj(["sin", ["x", 0]])
    m = SmoothMap.from_exprs([e0, e1], 2)
    x = np.array([0.4, 2.0])
    J = m.jacobian(x)
    assert J == pytest.approx(np.array([[2.0, 0.4], [np.cos(0.4), 0.0]]), rel=1e-8)
    assert m.value(x) == pytest.approx([0.8, np.sin(0.4)])
    assert m.dim_in == 2 and m.dim_out == 2


def test_smooth_map_identity_and_quadratic_term():
    m = SmoothMap.identity(3)
    x = np.array([1.0, -2.0, 0.5])
    assert np.array_equal(m.value(x), x)
    assert np.array_equal(m.jacobian(x), np.eye(3))
    w = np.array([0.1, 0.2, 0.3])
    assert m.quadratic_term(x, w) == pytest.approx(np.zeros(3))


def test_combined_hessian_weights_component_hessians():
    # F = (x0^2, x0*x1); y . F has Hessian 2*y0*e00 + y1*(e01+e10)
    e0 = from_obj(["pow", ["x", 0], 2])
    e1 = from_obj(["*", ["x", 0], ["x", 1]])
    m = SmoothMap.from_exprs([e0, e1], 2)
    y = np.array([3.0, -1.0])
    H = m.combined_hessian(np.array([0.2, 0.9]), y)
    assert H == pytest.approx(np.array([[6.0, -1.0], [-1.0, 0.0]]), rel=1e-5, abs=1e-5)
    assert np.array_equal(H, H.T)


# ---------------------------------------------------------------------------
# extended-Hessian residual: second-order expansion checks
# ---------------------------------------------------------------------------

def test_residual_vanishes_for_quadratics():
    Q = np.array([[2.0, 0.5], [0.5, 1.0]])
    orc = SmoothOracle.quadratic(Q)
    prof = extended_hessian_residual(orc, np.zeros(2), Q)
    assert all(r == pytest.approx(0.0, abs=1e-9) for r in prof.max_residuals)


def test_residual_refutes_a_wrong_hessian():
    Q = np.array([[2.0]])
    orc = SmoothOracle.quadratic(Q)
    prof = extended_hessian_residual(orc, np.zeros(1), np.array([[5.0]]))
    # wrong curvature: residual stays bounded away from zero at every radius
    assert min(prof.max_residuals) > 0.1


def test_residual_blows_up_for_abs():
    absf = SmoothOracle(1, lambda x: abs(float(x[0])), extended=True)
    prof = extended_hessian_residual(absf, np.zeros(1), np.zeros((1, 1)))
    # |x| has no second-order expansion at 0: residuals grow without bound
    assert prof.max_residuals[-1] > 1e5
    assert prof.max_residuals[-1] > prof.max_residuals[0]


def test_residual_skips_kink_samples():
    # |x| away from 0: gradient is locally constant, so A = 0 fits, but the
    # sample that lands exactly on the kink must be skipped, not crash.
    orc = SmoothOracle.from_expr(Abs(Var(0)), 1)
    prof = extended_hessian_residual(orc, np.array([1.0]), np.zeros((1, 1)),
                                     radii=[1.0, 0.5])
    assert prof.skipped[0] == 1   # x = 0 raises KinkError
    assert prof.max_residuals[0] == pytest.approx(0.0)  # x = 2 fits A = 0
    assert prof.skipped[1] == 0   # radius 0.5 stays clear of the kink
    assert prof.max_residuals[1] == pytest.approx(0.0)


def test_value_many_agrees_with_value():
    rng = np.random.default_rng(1)
    orc = SmoothOracle.quadratic(np.eye(2), np.array([1.0, 0.0]))
    X = rng.normal(size=(5, 2))
    vals = orc.value_many(X)
    assert vals == pytest.approx([orc.value(row) for row in X])
