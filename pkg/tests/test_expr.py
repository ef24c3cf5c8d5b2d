"""Expression trees: symbolic gradients, kink/domain walls, JSON round-trips."""

import numpy as np
import pytest

from varcalc.expr import (
    Abs,
    Add,
    Const,
    Cos,
    Div,
    EvalDomainError,
    KinkError,
    Max,
    Min,
    Mul,
    Piecewise,
    Pow,
    Sin,
    Sqrt,
    Sub,
    Var,
    from_obj,
)


# ---------------------------------------------------------------------------
# random smooth expressions: symbolic gradient vs central differences
# ---------------------------------------------------------------------------

def _random_smooth(rng, n, depth):
    """Expression built only from smooth nodes, safe on all of R^n.

    Division and sqrt are wrapped so the denominator / radicand stays
    >= 1 everywhere; powers use small positive integer exponents.
    """
    if depth == 0:
        if rng.random() < 0.3:
            return Const(float(rng.uniform(-2.0, 2.0)))
        return Var(int(rng.integers(n)))
    a = _random_smooth(rng, n, depth - 1)
    b = _random_smooth(rng, n, depth - 1)
    pick = rng.integers(8)
    if pick == 0:
        return Add(a, b)
    if pick == 1:
        return Sub(a, b)
    if pick == 2:
        return Mul(a, b)
    if pick == 3:
        return Sin(a)
    if pick == 4:
        return Cos(a)
    if pick == 5:
        return Pow(a, float(rng.integers(1, 4)))
    if pick == 6:
        # denominator 1 + b^2 >= 1: never a domain error
        return Div(a, Add(Const(1.0), Mul(b, b)))
    # radicand 1 + a^2 >= 1
    return Sqrt(Add(Const(1.0), Mul(a, a)))


def _central_diff(expr, x, h=1e-6):
    g = np.zeros_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        g[i] = (expr.eval(x + e) - expr.eval(x - e)) / (2.0 * h)
    return g


def test_symbolic_gradient_matches_central_differences_on_random_smooth():
    rng = np.random.default_rng(2024)
    checked = 0
    while checked < 100:
        n = int(rng.integers(1, 5))
        expr = _random_smooth(rng, n, int(rng.integers(1, 4)))
        x = rng.uniform(-1.5, 1.5, size=n)
        val, grad = expr.eval_grad(x)
        assert np.isfinite(val)
        if np.linalg.norm(grad) > 1e4:
            continue  # steep spot: FD step would dominate the comparison
        fd = _central_diff(expr, x)
        assert grad == pytest.approx(fd, rel=1e-5, abs=1e-5)
        checked += 1


def test_eval_grad_value_equals_eval():
    rng = np.random.default_rng(7)
    for _ in range(20):
        n = int(rng.integers(1, 4))
        expr = _random_smooth(rng, n, 2)
        x = rng.uniform(-1.0, 1.0, size=n)
        val, _ = expr.eval_grad(x)
        assert val == expr.eval(x)


# ---------------------------------------------------------------------------
# kinks and domain walls
# ---------------------------------------------------------------------------

def test_abs_kink_raises_only_at_zero():
    a = Abs(Var(0))
    assert a.eval(np.array([0.0])) == 0.0  # value is fine
    _, g = a.eval_grad(np.array([-2.0]))
    assert g[0] == -1.0
    _, g = a.eval_grad(np.array([3.0]))
    assert g[0] == 1.0
    with pytest.raises(KinkError):
        a.eval_grad(np.array([0.0]))


def test_max_min_kink_at_ties():
    m = Max(Var(0), Const(1.0))
    _, g = m.eval_grad(np.array([2.0]))
    assert g[0] == 1.0
    _, g = m.eval_grad(np.array([0.0]))
    assert g[0] == 0.0
    with pytest.raises(KinkError):
        m.eval_grad(np.array([1.0]))
    with pytest.raises(KinkError):
        Min(Var(0), Var(1)).eval_grad(np.array([0.5, 0.5]))


def test_piecewise_threshold_is_a_kink_for_gradients():
    p = Piecewise(Var(0), 0.5, Const(0.0), Var(0))
    assert p.eval(np.array([0.2])) == 0.0
    assert p.eval(np.array([0.9])) == 0.9
    with pytest.raises(KinkError):
        p.eval_grad(np.array([0.5]))


def test_domain_errors():
    with pytest.raises(EvalDomainError):
        Div(Const(1.0), Var(0)).eval(np.array([0.0]))
    with pytest.raises(EvalDomainError):
        Sqrt(Var(0)).eval(np.array([-1.0]))
    with pytest.raises(EvalDomainError):
        Pow(Var(0), -1.0).eval(np.array([0.0]))


def test_sqrt_gradient_at_interior_point():
    s = Sqrt(Var(0))
    val, g = s.eval_grad(np.array([4.0]))
    assert val == 2.0
    assert g[0] == pytest.approx(0.25)


# ---------------------------------------------------------------------------
# JSON encoding round-trips
# ---------------------------------------------------------------------------

def test_to_obj_round_trip_preserves_structure_and_values():
    rng = np.random.default_rng(99)
    for _ in range(50):
        n = int(rng.integers(1, 4))
        expr = _random_smooth(rng, n, int(rng.integers(1, 4)))
        obj = expr.to_obj()
        back = from_obj(obj, n_vars=n)
        assert back.to_obj() == obj
        x = rng.uniform(-1.0, 1.0, size=n)
        assert back.eval(x) == expr.eval(x)


def test_round_trip_of_nonsmooth_nodes():
    exprs = [
        Abs(Sub(Var(0), Const(1.0))),
        Max(Var(0), Var(1)),
        Min(Var(0), Const(0.0)),
        Piecewise(Var(0), 0.5, Const(0.0), Var(0)),
    ]
    for expr in exprs:
        obj = expr.to_obj()
        assert from_obj(obj, n_vars=2).to_obj() == obj


def test_from_obj_accepts_bare_numbers():
    assert from_obj(3).eval(np.zeros(1)) == 3.0
    assert from_obj(-0.5).eval(np.zeros(1)) == -0.5


def test_from_obj_rejects_bad_inputs_with_path():
    with pytest.raises(EvalDomainError, match="boolean"):
        from_obj(True)
    with pytest.raises(EvalDomainError, match="expected a number"):
        from_obj([])
    with pytest.raises(EvalDomainError, match=r"\['x', index\]"):
        from_obj(["x", "a"])
    with pytest.raises(EvalDomainError, match="unknown expression tag"):
        from_obj(["frob", 1])
    with pytest.raises(EvalDomainError, match="out of range"):
        from_obj(["x", 5], n_vars=2)
    # nested failures report where they happened
    with pytest.raises(EvalDomainError, match="expr"):
        from_obj(["+", ["x", 0], ["sin"]], n_vars=1)


def test_from_obj_variable_bounds_are_enforced_only_when_requested():
    e = from_obj(["x", 5])  # no n_vars: allowed
    assert e.eval(np.arange(6.0)) == 5.0
