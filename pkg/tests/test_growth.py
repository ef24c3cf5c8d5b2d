"""Quadratic-growth certification: curvature field, face decomposition,
two-sided modulus bounds, and the battery of equivalent conditions.
"""

import math

import numpy as np
import pytest

from varcalc import catalog, growth
from varcalc.calculus import ExactCalculus, NotStationaryError
from varcalc.oracles import SmoothMap, SmoothOracle
from varcalc.polyfun import PolyhedralFn
from varcalc.polyhedra import Polyhedron
from varcalc.problem import CompositeProblem

NAMES = [
    "quadratic_growth",
    "strong_metric_subregularity",
    "isolated_stationarity",
    "graphical_derivative_injectivity",
    "graphical_derivative_positivity",
    "second_subderivative_positivity",
]


def _quad(Q, g=None, v_bar=None):
    n = Q.shape[0]
    return CompositeProblem(
        SmoothMap.identity(n),
        g if g is not None else PolyhedralFn.affine(np.zeros(n)),
        np.zeros(n),
        phi=SmoothOracle.quadratic(np.asarray(Q, dtype=float)),
        v_bar=v_bar,
    )


# ---------------------------------------------------------------------------
# curvature field (max of multiplier-vertex Hessian forms)
# ---------------------------------------------------------------------------

def test_curvature_field_matches_exact_second_subderivative():
    # independent routes: eigen/max route here, LP route in the calculus
    for seed in (1, 2, 3):
        e = catalog.random_nlp(seed=seed, n=3, m=2)
        ec = ExactCalculus(e.problem(), kappa=e.kappa)
        cf = growth.CurvatureField(ec)
        for w in ec.critical_cone().generator_rays():
            lhs = cf.value(w)
            rhs = ec.d2_f(w).value
            assert lhs.is_finite == rhs.is_finite
            if lhs.is_finite:
                assert lhs.raw == pytest.approx(rhs.raw, rel=1e-9, abs=1e-12)


def test_curvature_field_blows_up_along_multiplier_rays():
    # F = (-x, x^2) into the nonpositive orthant: multipliers (0, y2), y2 >= 0;
    # the recession ray (0,1) pairs with the strictly convex component, so the
    # max over the multiplier set is +inf in every nonzero direction
    from varcalc.expr import from_obj

    F = SmoothMap.from_exprs(
        [from_obj(["neg", ["x", 0]], n_vars=1),
         from_obj(["pow", ["x", 0], 2], n_vars=1)], 1)
    prob = CompositeProblem(
        F, PolyhedralFn.indicator(Polyhedron.nonpositive_orthant(2)),
        np.zeros(1))
    cf = growth.CurvatureField(ExactCalculus(prob))
    assert cf.value(np.array([1.0])).is_inf
    assert cf.value(np.array([-2.0])).is_inf
    # the flat benchmark map instead has zero curvature at the base point
    e = catalog.get("example_4_6")
    cf46 = growth.CurvatureField(ExactCalculus(e.problem(), kappa=e.kappa))
    assert cf46.value(np.array([1.0])).raw == 0.0


def test_curvature_field_requires_multipliers():
    prob = CompositeProblem(
        SmoothMap.identity(1),
        PolyhedralFn.indicator(Polyhedron.nonpositive_orthant(1)),
        np.zeros(1),
        v_bar=np.array([-1.0]),
    )
    with pytest.raises((ValueError, NotStationaryError)):
        growth.CurvatureField(ExactCalculus(prob))


def test_curvature_field_unit_value_scale_invariant():
    Q = np.array([[2.0, 0.3], [0.3, 1.0]])
    cf = growth.CurvatureField(ExactCalculus(_quad(Q)))
    w = np.array([1.0, -2.0])
    a = cf.unit_value(w).raw
    for lam in (2.0, 0.5, 10.0):
        assert cf.unit_value(lam * w).raw == pytest.approx(a, rel=1e-12)
    with pytest.raises(ValueError):
        cf.unit_value(np.zeros(2))


# ---------------------------------------------------------------------------
# face decomposition of the critical cone
# ---------------------------------------------------------------------------

def test_orthant_cone_faces():
    K = Polyhedron.nonpositive_orthant(3).tangent_cone(np.zeros(3))
    faces = growth.critical_faces(K)
    # every proper face with a relative interior: 2^3 - 1 (origin excluded)
    assert len(faces) == 7
    tights = {f.tight_rows for f in faces}
    assert () in tights and (0, 1) in tights
    for f in faces:
        # orthonormal span basis, generators inside the cone
        assert np.allclose(f.span_basis.T @ f.span_basis,
                           np.eye(f.span_basis.shape[1]), atol=1e-12)
        for g in f.generators:
            assert K.contains_dir(g)


def test_full_space_single_face():
    K = Polyhedron.whole_space(2).tangent_cone(np.zeros(2))
    faces = growth.critical_faces(K)
    assert len(faces) == 1
    assert faces[0].span_basis.shape == (2, 2)


# ---------------------------------------------------------------------------
# qg_modulus bounds
# ---------------------------------------------------------------------------

def test_modulus_on_psd_quadratic_equals_min_eigenvalue():
    rng = np.random.default_rng(7)
    for _ in range(6):
        n = int(rng.integers(2, 7))
        A = rng.normal(size=(n, n))
        Q = A @ A.T + 0.3 * np.eye(n)
        gb = growth.qg_modulus(ExactCalculus(_quad(Q)))
        lam = float(np.linalg.eigvalsh(Q)[0])
        assert gb.lower == pytest.approx(lam, abs=1e-10)
        assert gb.upper == pytest.approx(lam, abs=1e-10)
        assert gb.certified_positive and not gb.refuted and not gb.vacuous
        assert gb.verdict == "holds"
        assert gb.n_faces == 1


def test_modulus_refuted_on_saddle_with_witness():
    gb = growth.qg_modulus(ExactCalculus(_quad(np.diag([1.0, -1.0]))))
    assert gb.verdict == "fails"
    assert gb.refuted and not gb.certified_positive
    assert gb.upper == pytest.approx(-1.0, abs=1e-9)
    # the witness direction actually realizes the negative value
    w = gb.witness
    assert w is not None
    assert float(w @ np.diag([1.0, -1.0]) @ w) / float(w @ w) == pytest.approx(
        -1.0, abs=1e-9)


def test_modulus_vacuous_on_trivial_cone():
    e = catalog.get("example_4_6")
    gb = growth.qg_modulus(ExactCalculus(e.problem(), kappa=e.kappa))
    assert gb.vacuous
    assert gb.lower == math.inf and gb.upper == math.inf
    assert gb.certified_positive
    assert gb.n_faces == 0


def test_modulus_sandwich_can_stay_open():
    # Q = [[1,2],[2,1]] on the nonpositive orthant: the true conic minimum
    # is 1, but the face-span floor sees the (1,-1) eigendirection outside
    # the cone: lower = -1 < 0 < upper -> honestly undetermined
    Q = np.array([[1.0, 2.0], [2.0, 1.0]])
    prob = _quad(Q, g=PolyhedralFn.indicator(Polyhedron.nonpositive_orthant(2)))
    gb = growth.qg_modulus(ExactCalculus(prob))
    assert gb.verdict == "undetermined"
    assert gb.lower <= -1.0 + 1e-9
    assert gb.upper == pytest.approx(1.0, abs=5e-2)  # sampled on the cone
    assert gb.lower <= gb.upper


def test_modulus_restricted_to_cone_beats_full_space():
    # Q indefinite but positive on the critical cone R_- x {0}
    Q = np.diag([1.0, -1.0])
    g = PolyhedralFn.indicator(
        Polyhedron(np.array([[1.0, 0.0], [0.0, 1.0], [0.0, -1.0]]),
                   np.zeros(3)))
    prob = _quad(Q, g=g)
    gb = growth.qg_modulus(ExactCalculus(prob))
    assert gb.verdict == "holds"
    assert gb.lower == pytest.approx(1.0, abs=1e-9)
    assert gb.upper == pytest.approx(1.0, abs=1e-9)


def test_modulus_bounds_ordered_on_random_instances():
    for seed in range(8):
        e = catalog.random_nlp(seed=seed, n=3, m=2)
        gb = growth.qg_modulus(ExactCalculus(e.problem(), kappa=e.kappa))
        if math.isfinite(gb.lower) and math.isfinite(gb.upper):
            assert gb.lower <= gb.upper + 1e-9


# ---------------------------------------------------------------------------
# the battery
# ---------------------------------------------------------------------------

def test_battery_all_holds_on_psd_quadratic():
    Q = np.array([[2.0, 0.3], [0.3, 1.0]])
    rep = growth.growth_battery(_quad(Q), kappa=1.0)
    lam = float(np.linalg.eigvalsh(Q)[0])
    assert [it.name for it in rep.items] == NAMES
    assert rep.overall == "holds"
    assert rep.consistent
    assert not rep.vacuous
    assert rep.lagrangian_form_used
    assert rep.modulus_lower == pytest.approx(lam, abs=1e-9)
    assert rep.modulus_upper == pytest.approx(lam, abs=1e-9)
    assert all(it.verdict == "holds" for it in rep.items)
    assert rep.item("second_subderivative_positivity").provenance == "certified"


def test_battery_all_fails_on_saddle():
    rep = growth.growth_battery(_quad(np.diag([1.0, -1.0])), kappa=1.0)
    assert rep.overall == "fails"
    assert rep.consistent  # all determined verdicts agree on "fails"
    assert all(it.verdict == "fails" for it in rep.items)
    assert rep.modulus_upper == pytest.approx(-1.0, abs=1e-9)


def test_battery_vacuous_benchmark_holds():
    e = catalog.get("example_4_6")
    rep = growth.growth_battery(e.problem(), kappa=e.kappa)
    assert rep.overall == "holds"
    assert rep.vacuous
    assert rep.consistent
    assert not rep.lagrangian_form_used  # no curvature form ever evaluated
    assert rep.modulus_lower == math.inf
    assert all(it.verdict == "holds" for it in rep.items)


def test_battery_undetermined_when_certificate_stays_open():
    Q = np.array([[1.0, 2.0], [2.0, 1.0]])
    prob = _quad(Q, g=PolyhedralFn.indicator(Polyhedron.nonpositive_orthant(2)))
    rep = growth.growth_battery(prob, kappa=1.0)
    assert rep.item("second_subderivative_positivity").verdict == "undetermined"
    assert rep.overall == "undetermined"
    assert rep.consistent  # determined subset all says "holds"


def test_battery_requires_stationary_base():
    prob = CompositeProblem(
        SmoothMap.identity(1),
        PolyhedralFn.indicator(Polyhedron.nonpositive_orthant(1)),
        np.zeros(1),
        v_bar=np.array([-1.0]),
    )
    with pytest.raises(NotStationaryError):
        growth.growth_battery(prob, kappa=1.0)


def test_battery_contradiction_raises(monkeypatch):
    # fabricate a sampled witness against a valid certificate: the audit
    # must hard-fail instead of reconciling
    from varcalc.estimators import SampleCheck

    def fake_qgc(f, x_bar, mu, gamma, n_samples=48, seed=0):
        return SampleCheck(holds=False, worst_ratio=-1.0,
                           worst_point=np.array([0.01, 0.0]), n_checked=10,
                           n_skipped=0)

    monkeypatch.setattr(growth, "qgc_sample_check", fake_qgc)
    Q = np.eye(2)
    with pytest.raises(RuntimeError, match="contradiction"):
        growth.growth_battery(_quad(Q), kappa=1.0)


def test_battery_consistency_on_random_corpus():
    for seed in range(10):
        e = catalog.random_nlp(seed=seed, n=3, m=2)
        rep = growth.growth_battery(e.problem(), kappa=e.kappa, seed=seed)
        assert rep.consistent, [
            (it.name, it.verdict, it.detail) for it in rep.items
        ]
        determined = {it.verdict for it in rep.items
                      if it.verdict != "undetermined"}
        assert len(determined) <= 1


def test_battery_kappa_feeds_subregularity_claim():
    # PSD quadratic: claimed kappa = 1/lambda_min certifies the sampled sweep
    Q = np.array([[2.0, 0.0], [0.0, 1.0]])
    rep = growth.growth_battery(_quad(Q), kappa=1.0 * (1.0 + 1e-6))
    it = rep.item("strong_metric_subregularity")
    assert it.verdict == "holds"
    assert it.data["kappa_claim"] is not None
