"""Polyhedra and polyhedral cones: membership, tangent/normal cones, encodings."""

import numpy as np
import pytest

from varcalc.polyhedra import PolyCone, Polyhedron, VRep, hrep_from_generators


def _orthant_neg(n):
    return Polyhedron.nonpositive_orthant(n)


# ---------------------------------------------------------------------------
# membership, distance, residuals
# ---------------------------------------------------------------------------

def test_contains_and_residuals():
    D = _orthant_neg(2)
    assert D.contains(np.array([-1.0, 0.0]))
    assert not D.contains(np.array([0.1, 0.0]))
    r = D.residuals(np.array([0.5, -1.0]))
    assert r == pytest.approx([0.5, -1.0])


def test_distance_to_box():
    D = Polyhedron.box(np.array([-1.0, -1.0]), np.array([1.0, 1.0]))
    assert D.distance(np.array([3.0, 0.0])) == pytest.approx(2.0)
    assert D.distance(np.array([0.0, 0.0])) == 0.0
    assert D.distance(np.array([2.0, 2.0])) == pytest.approx(np.sqrt(2.0))


def test_translate_and_linear_image():
    D = _orthant_neg(2)
    shifted = D.translate(np.array([1.0, 1.0]))
    assert shifted.contains(np.array([1.0, 1.0]))
    assert not shifted.contains(np.array([1.5, 0.0]))
    # image of R^2_- under (x,y) |-> x+y is R_-
    img = D.linear_image(np.array([[1.0, 1.0]]))
    assert img.contains(np.array([-3.0]))
    assert not img.contains(np.array([0.5]))


def test_intersect_and_emptiness():
    D = _orthant_neg(1)
    E = Polyhedron(np.array([[-1.0]]), np.array([-1.0]))  # x >= 1
    both = D.intersect(E)
    assert both.is_empty()
    assert not D.is_empty()


def test_equality_rows_via_eq_mask():
    # {y : y1 + y2 = 1, y >= 0}: the simplex
    A = np.array([[1.0, 1.0], [-1.0, 0.0], [0.0, -1.0]])
    b = np.array([1.0, 0.0, 0.0])
    S = Polyhedron(A, b, eq_mask=np.array([True, False, False]))
    assert S.contains(np.array([0.3, 0.7]))
    assert not S.contains(np.array([0.3, 0.3]))


# ---------------------------------------------------------------------------
# tangent cones
# ---------------------------------------------------------------------------

def test_tangent_cone_at_vertex_is_the_cone_itself():
    D = _orthant_neg(2)
    T = D.tangent_cone(np.zeros(2))
    assert T.contains_dir(np.array([-1.0, -1.0]))
    assert T.contains_dir(np.array([-1.0, 0.0]))
    assert not T.contains_dir(np.array([1.0, 0.0]))
    assert not T.contains_dir(np.array([0.0, 0.5]))


def test_tangent_cone_on_a_facet():
    D = _orthant_neg(2)
    T = D.tangent_cone(np.array([-1.0, 0.0]))  # only row y2 <= 0 active
    assert T.contains_dir(np.array([5.0, -1.0]))
    assert T.contains_dir(np.array([5.0, 0.0]))
    assert not T.contains_dir(np.array([0.0, 1.0]))


def test_tangent_cone_interior_is_whole_space():
    D = _orthant_neg(2)
    T = D.tangent_cone(np.array([-1.0, -1.0]))
    for u in np.eye(2):
        assert T.contains_dir(u) and T.contains_dir(-u)


def test_tangent_cone_halfplane_example():
    # P = {y : y1 + y2 <= 1, -y1 <= 0}, y = (1, 0) -> {u : u1 + u2 <= 0}
    P = Polyhedron(np.array([[1.0, 1.0], [-1.0, 0.0]]), np.array([1.0, 0.0]))
    T = P.tangent_cone(np.array([1.0, 0.0]))
    assert T.contains_dir(np.array([1.0, -1.0]))
    assert T.contains_dir(np.array([-1.0, 0.5]))
    assert not T.contains_dir(np.array([1.0, 0.0]))


def test_tangent_cone_rejects_points_outside():
    D = _orthant_neg(2)
    with pytest.raises(ValueError):
        D.tangent_cone(np.array([1.0, 0.0]))


def test_tangent_cone_homogeneity():
    rng = np.random.default_rng(11)
    P = Polyhedron(rng.normal(size=(5, 3)), np.abs(rng.normal(size=5)))
    y = np.zeros(3)  # feasible since b >= 0
    T = P.tangent_cone(y)
    for _ in range(30):
        u = rng.normal(size=3)
        if not T.contains_dir(u):
            continue
        for lam in (2.0, 10.0, 0.5):
            assert T.contains_dir(lam * u)


# ---------------------------------------------------------------------------
# second-order tangent sets
# ---------------------------------------------------------------------------

def test_second_order_tangent_line_examples():
    D = _orthant_neg(1)
    S0 = D.second_order_tangent_set(np.zeros(1), np.zeros(1))
    assert S0.contains(np.array([-2.0]))
    assert not S0.contains(np.array([0.5]))
    # u = -1 strictly tangent: no second-order constraint remains
    S1 = D.second_order_tangent_set(np.zeros(1), np.array([-1.0]))
    assert S1.contains(np.array([100.0])) and S1.contains(np.array([-100.0]))


def test_second_order_tangent_plane_example():
    D = _orthant_neg(2)
    S = D.second_order_tangent_set(np.zeros(2), np.array([-1.0, 0.0]))
    assert S.contains(np.array([7.0, -1.0]))
    assert not S.contains(np.array([7.0, 1.0]))


def test_second_order_tangent_definitional_feasibility():
    D = _orthant_neg(2)
    y = np.zeros(2)
    u = np.array([-1.0, 0.0])
    S = D.second_order_tangent_set(y, u)
    rng = np.random.default_rng(3)
    for _ in range(20):
        z = rng.normal(size=2) * 5.0
        member = S.contains(z, tol=1e-9)
        # y + t u + 0.5 t^2 z stays feasible for small t iff z is in the set
        t = 1e-4
        feas = D.contains(y + t * u + 0.5 * t * t * z, tol=1e-12)
        assert member == feas


def test_second_order_tangent_rejects_nontangent_direction():
    D = _orthant_neg(1)
    with pytest.raises(ValueError):
        D.second_order_tangent_set(np.zeros(1), np.array([1.0]))


# ---------------------------------------------------------------------------
# normal cones and polars
# ---------------------------------------------------------------------------

def test_normal_cone_polarity_with_tangent_cone():
    rng = np.random.default_rng(21)
    P = Polyhedron(rng.normal(size=(4, 2)), np.abs(rng.normal(size=4)) + 0.1)
    pts = [P.some_point()]
    out = P.project(rng.normal(size=2) * 10)
    pts.append(out.point)
    for y in pts:
        N = P.normal_cone_vrep(y)
        T = P.tangent_cone(y)
        for v in N:
            for u in T.generator_rays():
                assert float(v @ u) <= 1e-9


def test_normal_cone_at_box_vertex():
    D = Polyhedron.box(np.array([-1.0, -1.0]), np.array([1.0, 1.0]))
    N = D.normal_cone_vrep(np.array([1.0, 1.0]))
    # generated by e1, e2
    spanned = {tuple(np.round(v / max(np.abs(v)), 9)) for v in N}
    assert spanned == {(1.0, 0.0), (0.0, 1.0)}


def test_normal_cone_interior_is_zero():
    D = Polyhedron.box(np.array([-1.0]), np.array([1.0]))
    N = D.normal_cone_vrep(np.zeros(1))
    assert N.shape[0] == 0


# ---------------------------------------------------------------------------
# PolyCone specifics
# ---------------------------------------------------------------------------

def test_polycone_trivial_detection():
    # {u : u <= 0, -u <= 0} = {0}
    C = PolyCone(np.array([[1.0], [-1.0]]))
    assert C.is_trivial()
    assert not PolyCone(np.array([[1.0, 0.0]])).is_trivial()


def test_polycone_generator_rays_span_the_cone():
    C = PolyCone(-np.eye(2))  # u >= 0
    rays = C.generator_rays()
    assert rays.shape[0] >= 2
    for r in rays:
        assert C.contains_dir(r)
    # every nonneg vector must be a nonneg combination; spot-check the corners
    hull = {tuple(np.round(r / max(np.abs(r)), 9)) for r in rays}
    assert (1.0, 0.0) in hull and (0.0, 1.0) in hull


def test_polycone_polar_rays():
    C = PolyCone(-np.eye(2))  # nonnegative orthant
    polar = C.polar_rays()
    for v in polar:
        for u in C.generator_rays():
            assert float(v @ u) <= 1e-9
    # polar of R^2_+ is R^2_-: check -e1 is representable
    assert any(np.allclose(v / np.linalg.norm(v), [-1.0, 0.0]) for v in polar)


def test_contains_dir_is_scale_invariant():
    C = PolyCone(np.array([[1.0, 1.0]]))
    u = np.array([1.0, -1.0 - 1e-12])
    assert C.contains_dir(u) == C.contains_dir(1e6 * u)


def test_whole_space_and_trivial_cones():
    W = Polyhedron.whole_space(3)
    assert W.contains(np.full(3, 1e9))
    T = W.tangent_cone(np.zeros(3))
    assert T.contains_dir(np.full(3, -27.0))


# ---------------------------------------------------------------------------
# serialization round-trip
# ---------------------------------------------------------------------------

def test_to_obj_from_obj_round_trip():
    A = np.array([[1.0, 2.0], [0.0, -1.0]])
    b = np.array([3.0, 0.0])
    P = Polyhedron(A, b, eq_mask=np.array([False, True]))
    obj = P.to_obj()
    Q = Polyhedron.from_obj(obj)
    assert np.array_equal(Q.A, P.A)
    assert np.array_equal(Q.b, P.b)
    assert np.array_equal(Q.eq_mask, P.eq_mask)


def test_from_obj_validates_shapes():
    with pytest.raises(ValueError):
        Polyhedron.from_obj({"A": [[1.0, 2.0]], "b": [1.0, 2.0]})
    with pytest.raises(ValueError):
        Polyhedron.from_obj({"A": [[1.0]], "b": [0.0]}, dim=2)


# ---------------------------------------------------------------------------
# V-representation round-trip through hrep_from_generators
# ---------------------------------------------------------------------------

def test_vrep_hrep_round_trip_box():
    D = Polyhedron.box(np.array([-1.0, -2.0]), np.array([1.0, 2.0]))
    v = D.vrep()
    assert v.vertices.shape[0] == 4
    A2, b2, eq2 = hrep_from_generators(v.vertices, v.rays, v.lines)
    E = Polyhedron(A2, b2, eq2)
    rng = np.random.default_rng(5)
    for _ in range(50):
        x = rng.uniform(-3, 3, size=2)
        assert D.contains(x, tol=1e-8) == E.contains(x, tol=1e-8)
