"""Polyhedral convex functions: subdifferentials, directional calculus, conjugates.

The exact formulas here are the ones cross-validated against brute-force
difference-quotient oracles (conftest) and the sampling estimators.
"""

import numpy as np
import pytest

from varcalc.estimators import GridSchedule, est_second_subderivative
from varcalc.polyfun import BlackBoxFn, PolyhedralFn
from varcalc.polyhedra import Polyhedron

from conftest import brute_parabolic_quotient, brute_second_quotient, brute_subderivative


def _neg_orthant_ind(m):
    return PolyhedralFn.indicator(Polyhedron.nonpositive_orthant(m))


def _sample_dom_point(g, rng):
    """A point of dom g (randomized when the domain has room)."""
    if g.kind == "indicator":
        P = Polyhedron(g.dom.A, g.dom.b, g.dom.eq_mask)
        base = P.project(rng.normal(size=g.dim)).point
        return base
    return rng.normal(size=g.dim)


# ---------------------------------------------------------------------------
# values
# ---------------------------------------------------------------------------

def test_values_of_stock_functions():
    ind = _neg_orthant_ind(2)
    assert ind.value(np.array([-1.0, 0.0])).raw == 0.0
    assert ind.value(np.array([0.1, 0.0])).is_inf
    l1 = PolyhedralFn.l1_norm(2)
    assert l1.value(np.array([1.0, -2.0])).raw == 3.0
    linf = PolyhedralFn.max_norm(2)
    assert linf.value(np.array([1.0, -2.0])).raw == 2.0
    aff = PolyhedralFn.affine(np.array([2.0, -1.0]), beta=0.5)
    assert aff.value(np.array([1.0, 1.0])).raw == 1.5
    mx = PolyhedralFn.max_affine(np.array([[1.0], [2.0]]), np.array([0.0, -1.0]))
    assert mx.value(np.array([0.0])).raw == 0.0   # max(y, 2y-1) at 0
    assert mx.value(np.array([2.0])).raw == 3.0


def test_sum_of_adds_values_and_domains():
    s = PolyhedralFn.sum_of([PolyhedralFn.l1_norm(2), _neg_orthant_ind(2)])
    assert s.value(np.array([-1.0, -2.0])).raw == 3.0
    assert s.value(np.array([1.0, 0.0])).is_inf
    assert s.kind == "sum"


def test_value_many_matches_value():
    rng = np.random.default_rng(2)
    for g in (PolyhedralFn.l1_norm(2), PolyhedralFn.max_norm(2)):
        Y = rng.normal(size=(6, 2))
        many = g.value_many(Y)
        assert [m for m in many] == pytest.approx(
            [g.value(y).raw for y in Y])


# ---------------------------------------------------------------------------
# subdifferentials
# ---------------------------------------------------------------------------

def test_subdifferential_of_orthant_indicator_at_origin():
    # normal cone of R^2_- at 0 is R^2_+
    sd = _neg_orthant_ind(2).subdifferential(np.zeros(2))
    assert sd.contains(np.array([3.0, 0.0]))
    assert sd.contains(np.array([1.0, 2.0]))
    assert not sd.contains(np.array([-0.1, 0.0]))


def test_subdifferential_of_abs_at_zero_is_unit_interval():
    sd = PolyhedralFn.l1_norm(1).subdifferential(np.zeros(1))
    v = sd.vrep()
    got = sorted(float(x[0]) for x in v.vertices)
    assert got == pytest.approx([-1.0, 1.0])
    assert sd.contains(np.array([0.3]))
    assert not sd.contains(np.array([1.1]))


def test_subdifferential_of_max_affine_at_tie():
    # max(y, 2y-1) at y=1: both pieces active, gradients 1 and 2
    mx = PolyhedralFn.max_affine(np.array([[1.0], [2.0]]), np.array([0.0, -1.0]))
    sd = mx.subdifferential(np.array([1.0]))
    got = sorted(float(x[0]) for x in sd.vrep().vertices)
    assert got == pytest.approx([1.0, 2.0])
    # off the tie it is a singleton gradient
    sd2 = mx.subdifferential(np.array([2.0]))
    assert float(sd2.vrep().vertices[0, 0]) == pytest.approx(2.0)


def test_subgradient_inequality_randomized():
    rng = np.random.default_rng(4)
    for g in (PolyhedralFn.l1_norm(2), PolyhedralFn.max_norm(2),
              PolyhedralFn.max_affine(rng.normal(size=(3, 2)),
                                      rng.normal(size=3))):
        for _ in range(10):
            y = rng.normal(size=2)
            sd = g.subdifferential(y)
            vs = sd.vrep().vertices
            z = rng.normal(size=2)
            gy = g.value(y).raw
            gz = g.value(z).raw
            for v in vs:
                assert gz >= gy + float(v @ (z - y)) - 1e-9


# ---------------------------------------------------------------------------
# subderivatives dg(y)(u)
# ---------------------------------------------------------------------------

def test_subderivative_examples():
    ind = _neg_orthant_ind(1)
    assert ind.subderivative(np.zeros(1), np.array([-1.0])).raw == 0.0
    assert ind.subderivative(np.zeros(1), np.array([1.0])).is_inf
    l1 = PolyhedralFn.l1_norm(2)
    assert l1.subderivative(np.array([0.0, 1.0]),
                            np.array([1.0, -1.0])).raw == pytest.approx(0.0)


def test_subderivative_against_brute_quotients():
    rng = np.random.default_rng(8)
    for g in (PolyhedralFn.l1_norm(2), PolyhedralFn.max_norm(2),
              PolyhedralFn.affine(np.array([1.0, -2.0]))):
        for _ in range(8):
            y = rng.normal(size=2)
            u = rng.normal(size=2)
            exact = g.subderivative(y, u)
            brute = brute_subderivative(lambda z: g.value(z).raw, y, u)
            assert exact.is_finite
            # min over perturbed directions biases the quotient down by
            # O(t * ball_scale * lipschitz); 1e-4 covers the default grid
            assert brute == pytest.approx(exact.raw, abs=1e-4)


def test_subderivative_sublinearity():
    rng = np.random.default_rng(12)
    for g in (PolyhedralFn.l1_norm(3), PolyhedralFn.max_norm(3)):
        for _ in range(25):
            y = rng.normal(size=3)
            u1, u2 = rng.normal(size=3), rng.normal(size=3)
            lhs = g.subderivative(y, u1 + u2).raw
            rhs = g.subderivative(y, u1).raw + g.subderivative(y, u2).raw
            assert lhs <= rhs + 1e-9


def test_subderivative_positive_homogeneity():
    g = PolyhedralFn.l1_norm(2)
    y = np.array([0.0, 1.0])
    u = np.array([1.0, -2.0])
    base = g.subderivative(y, u).raw
    for lam in (2.0, 10.0, 0.5):
        assert g.subderivative(y, lam * u).raw == pytest.approx(lam * base)


def test_derivative_fn_is_the_subderivative_as_a_function():
    g = PolyhedralFn.l1_norm(2)
    y = np.array([0.0, 1.0])
    h = g.derivative_fn(y)
    rng = np.random.default_rng(3)
    for _ in range(10):
        u = rng.normal(size=2)
        assert h.value(u).raw == pytest.approx(g.subderivative(y, u).raw)


# ---------------------------------------------------------------------------
# second subderivative: the {0, +inf} dichotomy
# ---------------------------------------------------------------------------

def test_second_subderivative_examples():
    ind = _neg_orthant_ind(1)
    assert ind.second_subderivative(np.zeros(1), np.zeros(1),
                                    np.array([-1.0])).raw == 0.0
    # v = 1: dg(0)(-1) = 0 != <1,-1> so the value is +inf
    assert ind.second_subderivative(np.zeros(1), np.array([1.0]),
                                    np.array([-1.0])).is_inf
    l1 = PolyhedralFn.l1_norm(1)
    assert l1.second_subderivative(np.zeros(1), np.zeros(1),
                                   np.zeros(1)).raw == 0.0


def test_second_subderivative_requires_a_subgradient():
    with pytest.raises(ValueError):
        _neg_orthant_ind(1).second_subderivative(
            np.zeros(1), np.array([-1.0]), np.zeros(1))


def test_dichotomy_on_randomized_instances(polyfun_corpus_members):
    rng = np.random.default_rng(42)
    for g in polyfun_corpus_members:
        for _ in range(12):
            y = _sample_dom_point(g, rng)
            sd = g.subdifferential(y)
            vr = sd.vrep()
            if vr.vertices.shape[0] == 0:
                continue
            v = vr.vertices[int(rng.integers(vr.vertices.shape[0]))]
            if vr.rays.shape[0] and rng.random() < 0.5:
                v = v + rng.random() * vr.rays[int(rng.integers(vr.rays.shape[0]))]
            u = rng.normal(size=g.dim)
            val = g.second_subderivative(y, v, u)
            assert val.raw in (0.0, float("inf"))
            du = g.subderivative(y, u)
            matches = du.is_finite and du.raw == pytest.approx(float(v @ u), abs=1e-9)
            assert (val.raw == 0.0) == matches


def test_second_subderivative_against_brute_quotients():
    # exact 0 -> brute quotient near 0; exact +inf -> quotient blows up
    ind = _neg_orthant_ind(1)
    f = lambda z: ind.value(z).raw
    q0 = brute_second_quotient(f, np.zeros(1), np.zeros(1), np.array([-1.0]))
    assert abs(q0) <= 1e-3
    qinf = brute_second_quotient(f, np.zeros(1), np.array([1.0]), np.array([-1.0]))
    assert qinf > 1e3
    l1 = PolyhedralFn.l1_norm(1)
    q1 = brute_second_quotient(lambda z: l1.value(z).raw,
                               np.zeros(1), np.array([1.0]), np.array([1.0]))
    assert abs(q1) <= 1e-3   # dg(0)(1) = 1 = <1,1>: critical, so 0


def test_estimator_agreement_on_random_triples(polyfun_corpus_members):
    # 50 random (y, v, u): the sampling estimator must track the dichotomy
    rng = np.random.default_rng(77)
    schedule = GridSchedule(t0=0.1, ratio=0.5, levels=14, directions=16)
    checked = 0
    while checked < 50:
        g = polyfun_corpus_members[int(rng.integers(len(polyfun_corpus_members)))]
        y = _sample_dom_point(g, rng)
        vr = g.subdifferential(y).vrep()
        if vr.vertices.shape[0] == 0:
            continue
        v = vr.vertices[int(rng.integers(vr.vertices.shape[0]))]
        if vr.rays.shape[0] and rng.random() < 0.5:
            v = v + rng.random() * vr.rays[int(rng.integers(vr.rays.shape[0]))]
        u = rng.normal(size=g.dim)
        exact = g.second_subderivative(y, v, u)
        fn = BlackBoxFn(g.dim, lambda z, gg=g: gg.value(z).raw)
        est = est_second_subderivative(fn, y, v, u, schedule=schedule)
        if exact.raw == 0.0:
            assert not est.diverging
            assert abs(est.value.raw) <= 1e-3
        else:
            assert est.diverging or est.value.raw > 1e3
        checked += 1


# ---------------------------------------------------------------------------
# parabolic subderivatives
# ---------------------------------------------------------------------------

def test_parabolic_examples():
    ind = _neg_orthant_ind(1)
    # u = -1 interior to the tangent cone: any z gives 0
    for z in (-7.0, 0.0, 55.0):
        assert ind.parabolic_subderivative(np.zeros(1), np.array([-1.0]),
                                           np.array([z])).raw == 0.0
    # u = 0: z = -1 stays feasible, z = +1 leaves
    assert ind.parabolic_subderivative(np.zeros(1), np.zeros(1),
                                       np.array([-1.0])).raw == 0.0
    assert ind.parabolic_subderivative(np.zeros(1), np.zeros(1),
                                       np.array([1.0])).is_inf
    # |.|: u = 0 gives d2g(0)(0|z) = |z|
    l1 = PolyhedralFn.l1_norm(1)
    assert l1.parabolic_subderivative(np.zeros(1), np.zeros(1),
                                      np.array([1.0])).raw == pytest.approx(1.0)
    assert l1.parabolic_subderivative(np.zeros(1), np.zeros(1),
                                      np.array([-2.5])).raw == pytest.approx(2.5)


def test_parabolic_requires_finite_slope():
    with pytest.raises(ValueError):
        _neg_orthant_ind(1).parabolic_subderivative(
            np.zeros(1), np.array([1.0]), np.zeros(1))


def test_parabolic_against_brute_quotients():
    rng = np.random.default_rng(14)
    for g in (PolyhedralFn.l1_norm(2), PolyhedralFn.max_norm(2)):
        f = lambda z, gg=g: gg.value(z).raw
        for _ in range(8):
            y = rng.normal(size=2) * 0.5
            u = rng.normal(size=2)
            z = rng.normal(size=2)
            slope = g.subderivative(y, u)
            exact = g.parabolic_subderivative(y, u, z)
            brute = brute_parabolic_quotient(f, y, u, slope.raw, z)
            assert exact.is_finite
            # the sampling oracle carries O(t * ball_scale * lipschitz)
            # bias from its direction perturbations; 1e-3 is its resolution
            assert brute == pytest.approx(exact.raw, abs=1e-3)


def test_parabolic_domain_is_where_the_value_is_finite():
    ind = _neg_orthant_ind(2)
    dom = ind.parabolic_domain(np.zeros(2), np.array([-1.0, 0.0]))
    assert dom.contains(np.array([9.0, -1.0]))
    assert not dom.contains(np.array([9.0, 1.0]))
    assert ind.parabolic_subderivative(np.zeros(2), np.array([-1.0, 0.0]),
                                       np.array([9.0, -1.0])).is_finite


# ---------------------------------------------------------------------------
# conjugates and the pairing identity
# ---------------------------------------------------------------------------

def test_fenchel_conjugate_values():
    l1 = PolyhedralFn.l1_norm(1)
    assert l1.conjugate(np.array([0.5])).raw == 0.0
    assert l1.conjugate(np.array([1.0])).raw == 0.0
    assert l1.conjugate(np.array([2.0])).is_inf
    ind = _neg_orthant_ind(1)
    assert ind.conjugate(np.array([1.0])).raw == 0.0   # support fn of R_-
    assert ind.conjugate(np.array([-1.0])).is_inf


def test_parabolic_conjugate_identity_examples():
    ind = _neg_orthant_ind(1)
    r = ind.parabolic_conjugate_check(np.zeros(1), np.array([-1.0]), np.zeros(1))
    assert r["ok"] and r["lhs"].raw == 0.0 and r["rhs"].raw == 0.0
    r2 = ind.parabolic_conjugate_check(np.zeros(1), np.array([-1.0]),
                                       np.array([1.0]))
    assert r2["ok"] and r2["lhs"].is_inf and r2["rhs"].is_inf
    assert not r2["v_in_pairing_set"]
    l1 = PolyhedralFn.l1_norm(1)
    r3 = l1.parabolic_conjugate_check(np.zeros(1), np.zeros(1), np.array([0.5]))
    assert r3["ok"] and r3["lhs"].raw == 0.0 and r3["rhs"].raw == 0.0


def test_parabolic_conjugate_identity_randomized(polyfun_corpus_members):
    rng = np.random.default_rng(123)
    checked = 0
    while checked < 100:
        g = polyfun_corpus_members[int(rng.integers(len(polyfun_corpus_members)))]
        y = _sample_dom_point(g, rng)
        u = rng.normal(size=g.dim)
        if not g.subderivative(y, u).is_finite:
            continue
        vr = g.subdifferential(y).vrep()
        if vr.vertices.shape[0] == 0:
            continue
        v = vr.vertices[int(rng.integers(vr.vertices.shape[0]))]
        if vr.rays.shape[0] and rng.random() < 0.3:
            v = v + rng.random() * vr.rays[int(rng.integers(vr.rays.shape[0]))]
        r = g.parabolic_conjugate_check(y, u, v)
        assert r["ok"], (g.kind, y, u, v, r)
        # exact polyhedral case: both sides live in {0, +inf} up to the
        # support term, and they agree exactly
        assert r["lhs"].raw == r["rhs"].raw
        checked += 1


# ---------------------------------------------------------------------------
# metadata
# ---------------------------------------------------------------------------

def test_lipschitz_constants():
    assert PolyhedralFn.l1_norm(2).lipschitz == pytest.approx(np.sqrt(2.0))
    assert PolyhedralFn.max_norm(5).lipschitz == pytest.approx(1.0)
    assert PolyhedralFn.affine(np.array([3.0, 4.0])).lipschitz == pytest.approx(5.0)


def test_active_pieces_at_a_tie():
    mx = PolyhedralFn.max_affine(np.array([[1.0], [2.0]]), np.array([0.0, -1.0]))
    assert mx.active_pieces(np.array([1.0])) == [0, 1]
    assert mx.active_pieces(np.array([5.0])) == [1]


def test_blackbox_wrapper():
    bb = BlackBoxFn(1, lambda z: abs(float(z[0])), name="absval")
    assert bb.value(np.array([-2.0])) == 2.0
    assert bb.name == "absval"
