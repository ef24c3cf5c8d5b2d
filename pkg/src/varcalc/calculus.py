"""Exact second-order calculus for smooth-plus-polyhedral-composite problems.

Everything in this module is formula-driven: values come out of finite
linear algebra and certified LP/QP solves, never from sampling.  The
sampling estimators live elsewhere and are kept import-independent so the
two routes can cross-validate each other.

Standing setup:  f = phi + g o F  at a base point x_bar with a base
subgradient v_bar for the composite part (so the base subgradient of f
itself is grad phi(x_bar) + v_bar).  g is polyhedral in max-affine +
domain normal form, F is twice differentiable, and the constraint
qualification is metric subregularity of the feasibility system at the
base point; its modulus kappa enters only through the multiplier-norm
bound used for attainment certificates.

Key structural facts the code leans on (all for polyhedral g):

* The multiplier set L = {y in subdiff g(F0) : J'y = v_bar} is a
  polyhedron; it is nonempty exactly when the base pair is stationary.
* Every y in L pairs identically with a direction w:  <y, Jw> = <v_bar, w>.
  Hence the "multipliers active along w" are either all of L (when w is
  critical) or none of it, and criticality reduces to the scalar test
    dg(F0)(Jw) == <v_bar, w>.
* On critical directions the second subderivative of the composite part
  is the support function of L evaluated at the curvature vector
  q(w) = (w' H_k w)_k -- a plain LP.  Off the critical cone it is +inf.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .expr import KinkError
from .extreal import INF, ExtReal
from .lpsolve import LpProblem, lp_solve
from .polyfun import PolyhedralFn
from .polyhedra import PolyCone, Polyhedron
from .problem import CompositeProblem

CRIT_TOL = 1e-9
PAIR_TOL = 1e-8  # primal/dual and pairing agreement


class NotStationaryError(ValueError):
    """The base pair admits no multiplier: v_bar is not a subgradient."""


# ---------------------------------------------------------------------------
# result containers
# ---------------------------------------------------------------------------


@dataclass
class D2Value:
    """Second subderivative of the composite part along one direction."""

    value: ExtReal
    status: str  # "ok" | "not_tangent" | "not_critical" | "unbounded"
    slope: ExtReal  # dg(F0)(Jw)
    pairing: float  # <v_bar, w>
    multiplier: np.ndarray | None = None  # an attaining vertex of L
    critical: bool = False
    bracket: tuple[float, float] | None = None  # only on "unbounded"
    warning: str = ""


@dataclass
class DualPairReport:
    primal: ExtReal  # min over arcs of the parabolic model
    dual: ExtReal  # max over multipliers of the curvature pairing
    gap: float  # |primal - dual| when both finite, else 0/inf
    consistent: bool
    z_opt: np.ndarray | None
    y_opt: np.ndarray | None
    primal_status: str
    dual_status: str


@dataclass
class ParabolicRegularityReport:
    d2: ExtReal  # second subderivative (dual route)
    arc_infimum: ExtReal  # min_z [ parabolic(w|z) - <v_bar, z> ]
    z_opt: np.ndarray | None
    gap: float
    regular: bool


@dataclass
class GraphicalDerivative:
    """One fiber of the graphical derivative of the subgradient map."""

    direction: np.ndarray
    in_domain: bool
    d2_half_slope: float | None  # <z, w> shared by every element (= d2 psi)
    set_psi: Polyhedron | None  # D(subdiff psi)(x_bar | v_bar)(w)
    set_f: Polyhedron | None  # same fiber shifted by hess phi @ w
    multiplier_face: Polyhedron | None
    normal_rays: np.ndarray | None
    pairing_ok: bool | None


@dataclass
class AttainmentReport:
    y_star: np.ndarray
    norm: float
    tau: float | None
    within_ball: bool | None


@dataclass
class MsqcReport:
    """Sampled metric-subregularity check for the feasibility system."""

    kappa_observed: float
    holds: bool | None
    n_checked: int
    n_skipped: int
    exact_domain_distance: bool
    worst_point: np.ndarray | None
    note: str = ""


# ---------------------------------------------------------------------------
# the calculus engine
# ---------------------------------------------------------------------------


class ExactCalculus:
    """Formula-exact generalized derivatives at one base pair.

    ``kappa`` is the metric-subregularity modulus of the feasibility
    system; it is only needed for the multiplier-norm bound tau and the
    attainment certificates, so it may be omitted otherwise.
    """

    def __init__(self, problem: CompositeProblem, kappa: float | None = None):
        self.problem = problem
        self.g: PolyhedralFn = problem.require_exact()
        self.base = problem.base()
        self.v_bar = problem.base_subgradient()
        self.kappa = kappa
        self._cache: dict = {}

    # -- first order --------------------------------------------------------

    def g_subdifferential(self) -> Polyhedron:
        if "dg" not in self._cache:
            self._cache["dg"] = self.g.subdifferential(self.base.F0)
        return self._cache["dg"]

    def psi_subdifferential(self) -> Polyhedron:
        """subdiff (g o F)(x_bar) = J' subdiff g(F0)  (exact chain rule)."""
        if "dpsi" not in self._cache:
            self._cache["dpsi"] = self.g_subdifferential().linear_image(self.base.J.T)
        return self._cache["dpsi"]

    def f_subdifferential(self) -> Polyhedron:
        return self.psi_subdifferential().translate(self.base.grad_phi)

    def subderivative_psi(self, w) -> ExtReal:
        w = self._dir(w)
        return self.g.subderivative(self.base.F0, self.base.J @ w)

    def subderivative_f(self, w) -> ExtReal:
        w = self._dir(w)
        inner = ExtReal(float(self.base.grad_phi @ w))
        return inner + self.subderivative_psi(w)

    # -- multipliers and criticality -----------------------------------------

    def multipliers(self) -> Polyhedron:
        """L = {y in subdiff g(F0) : J' y = v_bar}."""
        if "lam" not in self._cache:
            S = self.g_subdifferential()
            A = np.vstack([S.A, self.base.J.T])
            b = np.concatenate([S.b, self.v_bar])
            eq = np.concatenate(
                [S.eq_mask, np.ones(self.base.J.shape[1], dtype=bool)]
            )
            self._cache["lam"] = Polyhedron(A, b, eq)
        return self._cache["lam"]

    def is_stationary(self) -> bool:
        if "stationary" not in self._cache:
            self._cache["stationary"] = not self.multipliers().is_empty()
        return self._cache["stationary"]

    def require_stationary(self) -> None:
        if not self.is_stationary():
            raise NotStationaryError(
                "no multiplier exists for the base pair; the base subgradient "
                "is not a subgradient of the composite part there"
            )

    def critical_cone(self) -> PolyCone:
        """K = {w : dg(F0)(Jw) = <v_bar, w>}  (needs a stationary pair)."""
        if "K" not in self._cache:
            self.require_stationary()
            J = self.base.J
            T = self.g.dom.tangent_cone(self.base.F0)
            act = self.g.active_pieces(self.base.F0)
            piece_rows = self.g.pieces_A[act] @ J - self.v_bar[np.newaxis, :]
            rows = np.vstack([T.A @ J, piece_rows])
            eq = np.concatenate(
                [T.eq_mask, np.zeros(piece_rows.shape[0], dtype=bool)]
            )
            self._cache["K"] = PolyCone(rows, eq)
        return self._cache["K"]

    def is_critical(self, w) -> bool:
        """Scalar criticality test: dg(F0)(Jw) == <v_bar, w>."""
        w = self._dir(w)
        slope = self.subderivative_psi(w)
        if slope.is_inf:
            return False
        pairing = float(self.v_bar @ w)
        scale = max(1.0, abs(slope.raw), float(np.linalg.norm(self.v_bar)) * float(np.linalg.norm(w)))
        return abs(slope.raw - pairing) <= CRIT_TOL * scale

    def tau(self, kappa: float | None = None) -> float:
        """Multiplier-norm bound  kappa*l*|J| + kappa*|v_bar| + l."""
        k = self.kappa if kappa is None else kappa
        if k is None:
            raise ValueError("tau needs the subregularity modulus kappa")
        ell = self.g.lipschitz
        if ell is None:
            raise ValueError("tau needs a Lipschitz modulus for the composite part")
        Jnorm = float(np.linalg.norm(self.base.J, 2))
        return k * ell * Jnorm + k * float(np.linalg.norm(self.v_bar)) + ell

    def curvature_vector(self, w) -> np.ndarray:
        """q(w) = (w' H_k w)_k across the components of F."""
        return self.base.quadratic_term(self._dir(w))

    # -- second subderivative (support-function LP) ---------------------------

    def _multiplier_lp_parts(self):
        L = self.multipliers()
        ub, eqm = ~L.eq_mask, L.eq_mask
        return L.A[ub], L.b[ub], L.A[eqm], L.b[eqm]

    def d2_psi(self, w) -> D2Value:
        """d2 (g o F)(x_bar | v_bar)(w), exactly.

        On the critical cone this is  max { <q(w), y> : y in L }; the
        criticality equality row <Jw, y> = dg(F0)(Jw) that the general
        formula carries is redundant there (every multiplier pairs the
        same way) and infeasible elsewhere, so it is resolved by the
        scalar test rather than inside the LP.
        """
        w = self._dir(w)
        self.require_stationary()
        slope = self.subderivative_psi(w)
        pairing = float(self.v_bar @ w)
        if slope.is_inf:
            return D2Value(INF, "not_tangent", slope, pairing)
        if not self.is_critical(w):
            return D2Value(INF, "not_critical", slope, pairing)
        q = self.curvature_vector(w)
        A_ub, b_ub, A_eq, b_eq = self._multiplier_lp_parts()
        res = lp_solve(LpProblem(c=-q, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq))
        if res.status == "optimal":
            return D2Value(
                ExtReal(-res.value),
                "ok",
                slope,
                pairing,
                multiplier=res.x,
                critical=True,
            )
        if res.status == "unbounded":
            # The support function of L is +inf at q(w).  Under the standing
            # assumptions this cannot happen (the max is attained inside a
            # tau ball), so flag it; when kappa is known, bracket the
            # tau-ball value between the inscribed and circumscribed boxes.
            bracket = None
            if self.kappa is not None and self.g.lipschitz is not None:
                t = self.tau()
                m = q.size
                lo = self._box_support(q, t / math.sqrt(m))
                hi = self._box_support(q, t)
                bracket = (lo, hi)
            return D2Value(
                INF,
                "unbounded",
                slope,
                pairing,
                critical=True,
                bracket=bracket,
                warning=(
                    "multiplier LP unbounded: the curvature pairing has no "
                    "finite maximum over the multiplier set, which "
                    "contradicts subregularity of the feasibility system"
                ),
            )
        raise NotStationaryError("multiplier LP infeasible at a stationary pair")

    def _box_support(self, q: np.ndarray, radius: float) -> float:
        A_ub, b_ub, A_eq, b_eq = self._multiplier_lp_parts()
        m = q.size
        box = np.vstack([np.eye(m), -np.eye(m)])
        A2 = np.vstack([A_ub, box]) if A_ub.size else box
        b2 = np.concatenate([b_ub, np.full(2 * m, radius)])
        res = lp_solve(LpProblem(c=-q, A_ub=A2, b_ub=b2, A_eq=A_eq, b_eq=b_eq))
        if res.status != "optimal":
            raise RuntimeError("bounded support LP failed unexpectedly")
        return -res.value

    def d2_f(self, w) -> D2Value:
        """Second subderivative of the full objective at the base pair.

        Sum rule with a twice-differentiable first part:
            d2 f(x_bar | grad phi + v_bar)(w) = <w, hess phi w> + d2 psi(w).
        """
        w = self._dir(w)
        inner = self.d2_psi(w)
        quad = float(w @ self.base.hess_phi @ w)
        value = ExtReal(quad) + inner.value
        return D2Value(
            value=value,
            status=inner.status,
            slope=inner.slope,
            pairing=inner.pairing,
            multiplier=inner.multiplier,
            critical=inner.critical,
            bracket=inner.bracket,
            warning=inner.warning,
        )

    # -- parabolic calculus ---------------------------------------------------

    def parabolic_psi(self, w, z) -> ExtReal:
        """d2 (g o F)(x_bar)(w | z) = parabolic of g at (F0, Jw) with arc
        Jz + q(w)  -- the exact composite chain rule."""
        w, z = self._dir(w), self._dir(z)
        if self.subderivative_psi(w).is_inf:
            return INF
        arc = self.base.J @ z + self.curvature_vector(w)
        return self.g.parabolic_subderivative(self.base.F0, self.base.J @ w, arc)

    def parabolic_f(self, w, z) -> ExtReal:
        """Parabolic quotient limit of the full objective:
        <grad phi, z> + <w, hess phi w> + parabolic of the composite part."""
        w, z = self._dir(w), self._dir(z)
        smooth = float(self.base.grad_phi @ z) + float(w @ self.base.hess_phi @ w)
        return ExtReal(smooth) + self.parabolic_psi(w, z)

    def arc_infimum(self, w) -> tuple[ExtReal, np.ndarray | None, str]:
        """min_z [ parabolic_psi(w | z) - <v_bar, z> ]  as an epigraph LP.

        Returns (value, minimizing arc, status).  The LP being unbounded
        below means w is not critical (then the second subderivative is
        +inf anyway); an infeasible LP means no arc keeps the parabolic
        quotient finite, which contradicts the standing qualification.
        """
        w = self._dir(w)
        slope = self.subderivative_psi(w)
        if slope.is_inf:
            return INF, None, "not_tangent"
        J, n = self.base.J, self.problem.n
        q = self.curvature_vector(w)
        u = J @ w
        h = self.g.derivative_fn(self.base.F0)  # normal form of dg(F0)
        act = h.active_pieces(u)
        T2 = h.dom.tangent_cone(u)
        # variables (z, s): minimize s - <v_bar, z>
        piece = np.hstack([h.pieces_A[act] @ J, -np.ones((len(act), 1))])
        piece_rhs = -(h.pieces_A[act] @ q)
        cone = np.hstack([T2.A @ J, np.zeros((T2.A.shape[0], 1))])
        cone_rhs = -(T2.A @ q)
        ub = ~T2.eq_mask
        A_ub = np.vstack([piece, cone[ub]])
        b_ub = np.concatenate([piece_rhs, cone_rhs[ub]])
        A_eq = cone[~ub]
        b_eq = cone_rhs[~ub]
        c = np.concatenate([-self.v_bar, [1.0]])
        res = lp_solve(LpProblem(c=c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq))
        if res.status == "optimal":
            return ExtReal(res.value), res.x[:n], "ok"
        if res.status == "unbounded":
            return INF, None, "not_critical"
        return INF, None, "arc_infeasible"

    def d2_dual_pair(self, w) -> DualPairReport:
        """Cross-check the two exact routes to the second subderivative.

        Primal: arc minimization of the parabolic model.  Dual: support
        function of the multiplier set at the curvature vector.  Linear
        programming duality makes them equal whenever the standing
        qualification holds; the report records both and the gap.
        """
        w = self._dir(w)
        primal, z_opt, p_status = self.arc_infimum(w)
        dual = self.d2_psi(w)
        if primal.is_inf and dual.value.is_inf:
            gap, consistent = 0.0, True
        elif primal.is_inf or dual.value.is_inf:
            gap, consistent = math.inf, False
        else:
            gap = abs(primal.raw - dual.value.raw)
            scale = max(1.0, abs(primal.raw), abs(dual.value.raw))
            consistent = gap <= PAIR_TOL * scale
        return DualPairReport(
            primal=primal,
            dual=dual.value,
            gap=gap,
            consistent=consistent,
            z_opt=z_opt,
            y_opt=dual.multiplier,
            primal_status=p_status,
            dual_status=dual.status,
        )

    def parabolic_regularity(self, w) -> ParabolicRegularityReport:
        """Parabolic regularity at w: the second subderivative equals the
        arc infimum of the parabolic model and the infimum is attained.

        The check is run on the composite part; adding the smooth part
        shifts both sides by the same amount, so the verdict transfers
        to the full objective unchanged.
        """
        pair = self.d2_dual_pair(w)
        attained = pair.z_opt is not None or pair.primal.is_inf
        return ParabolicRegularityReport(
            d2=pair.dual,
            arc_infimum=pair.primal,
            z_opt=pair.z_opt,
            gap=pair.gap,
            regular=pair.consistent and attained,
        )

    # -- graphical derivative of the subgradient map ---------------------------

    def multiplier_face(self, w) -> tuple[Polyhedron, float]:
        """Argmax face L*(w) = {y in L : <q(w), y> = d2 psi(w)}."""
        d2 = self.d2_psi(w)
        if d2.value.is_inf:
            raise ValueError("no multiplier face off the critical cone")
        L = self.multipliers()
        q = self.curvature_vector(w)
        A = np.vstack([L.A, q[np.newaxis, :]])
        b = np.concatenate([L.b, [d2.value.raw]])
        eq = np.concatenate([L.eq_mask, [True]])
        return Polyhedron(A, b, eq), d2.value.raw

    def graphical_derivative(self, w) -> GraphicalDerivative:
        """D(subdiff psi)(x_bar | v_bar)(w)  for w in the critical cone:

            { sum_k y_k H_k w : y in L*(w) }  +  N_K(w),

        where L*(w) is the face of multipliers maximizing the curvature
        pairing and N_K(w) is the normal cone to the critical cone.  The
        full-objective fiber adds hess phi @ w.  Every element z pairs as
        <z, w> = d2 psi(w) (the normal part is orthogonal to w).
        """
        w = self._dir(w)
        K = self.critical_cone()
        if not K.contains_dir(w):
            return GraphicalDerivative(
                direction=w,
                in_domain=False,
                d2_half_slope=None,
                set_psi=None,
                set_f=None,
                multiplier_face=None,
                normal_rays=None,
                pairing_ok=None,
            )
        face, d2val = self.multiplier_face(w)
        M = np.column_stack([H @ w for H in self.base.F_hessians])
        image = face.linear_image(M)
        normals = K.normal_cone_vrep(w)
        vset = image.vrep()
        rays = [vset.all_rays()] if vset.all_rays().shape[0] else []
        if normals.shape[0]:
            rays.append(normals)
        R = np.vstack(rays) if rays else None
        from .lpsolve import hrep_from_generators

        A, b, eq = hrep_from_generators(vset.vertices, R)
        set_psi = Polyhedron(A, b, eq)
        set_f = set_psi.translate(self.base.hess_phi @ w)
        pairing_ok = True
        for vertex in set_psi.vrep().vertices:
            scale = max(1.0, abs(d2val))
            if abs(float(vertex @ w) - d2val) > PAIR_TOL * scale:
                pairing_ok = False
        return GraphicalDerivative(
            direction=w,
            in_domain=True,
            d2_half_slope=d2val,
            set_psi=set_psi,
            set_f=set_f,
            multiplier_face=face,
            normal_rays=normals if normals.shape[0] else None,
            pairing_ok=pairing_ok,
        )

    def attained_multiplier(self, w) -> AttainmentReport:
        """Minimum-norm maximizer of the curvature pairing, with the
        tau-ball certificate when kappa is available."""
        face, _ = self.multiplier_face(w)
        proj = face.project(np.zeros(self.problem.m))
        norm = float(np.linalg.norm(proj.point))
        tau = None
        within = None
        if self.kappa is not None and self.g.lipschitz is not None:
            tau = self.tau()
            within = norm <= tau + 1e-9 * max(1.0, tau)
        return AttainmentReport(y_star=proj.point, norm=norm, tau=tau, within_ball=within)

    # -- helpers ---------------------------------------------------------------

    def _dir(self, w) -> np.ndarray:
        return np.asarray(w, dtype=float).reshape(self.problem.n)


# ---------------------------------------------------------------------------
# constraint-qualification check (sampled; distances to the feasible set
# are exact only when its halfspace description is supplied)
# ---------------------------------------------------------------------------


def msqc_check(
    problem: CompositeProblem,
    kappa: float | None = None,
    gamma: float = 0.1,
    n_samples: int = 64,
    seed: int = 0,
    feasible_set: Polyhedron | None = None,
) -> MsqcReport:
    """Sampled metric subregularity of the feasibility system

        dist(x, {F in dom g})  <=  kappa * dist(F(x), dom g)

    for x near the base point.  The right-hand distance is an exact
    Euclidean projection onto dom g.  The left-hand distance is exact
    when ``feasible_set`` (the preimage, as a polyhedron) is given;
    otherwise it is replaced by a Gauss-Newton feasibility-restoration
    upper bound and the report is flagged accordingly.
    """
    from scipy.stats import qmc

    g = problem.require_exact()
    x_bar = problem.x_bar
    n = problem.n
    eng = qmc.Halton(d=n, scramble=True, seed=seed)
    cube = 2.0 * eng.random(n_samples) - 1.0
    norms = np.linalg.norm(cube, axis=1)
    norms[norms < 1e-12] = 1.0
    dirs = cube / norms[:, np.newaxis]
    radii = gamma * np.logspace(0.0, -4.0, num=9)

    worst = 0.0
    worst_point = None
    checked = 0
    skipped = 0
    for r in radii:
        for u in dirs:
            x = x_bar + r * u
            lhs_gap = g.dom.distance(problem.F.value(x))
            if lhs_gap <= 1e-12:
                continue  # feasible points impose no constraint
            if feasible_set is not None:
                dist_dom = feasible_set.distance(x)
            else:
                dist_dom = _restoration_distance(problem, g, x)
                if dist_dom is None:
                    skipped += 1
                    continue
            checked += 1
            ratio = dist_dom / lhs_gap
            if ratio > worst:
                worst = ratio
                worst_point = x.copy()
    holds = None
    if kappa is not None:
        holds = checked > 0 and worst <= kappa * (1.0 + 1e-7)
    note = (
        "feasible-set distances are exact (halfspace description supplied)"
        if feasible_set is not None
        else "feasible-set distances are Gauss-Newton restoration upper bounds"
    )
    return MsqcReport(
        kappa_observed=worst,
        holds=holds,
        n_checked=checked,
        n_skipped=skipped,
        exact_domain_distance=feasible_set is not None,
        worst_point=worst_point,
        note=note,
    )


def _restoration_distance(
    problem: CompositeProblem, g: PolyhedralFn, x: np.ndarray
) -> float | None:
    """Upper bound on dist(x, {F in dom g}) by Gauss-Newton restoration."""
    z = x.copy()
    for _ in range(50):
        y = problem.F.value(z)
        target = g.dom.project(y).point
        resid = y - target
        if float(np.linalg.norm(resid)) <= 1e-11 * max(1.0, float(np.linalg.norm(y))):
            return float(np.linalg.norm(z - x))
        Jz = problem.F.jacobian(z)
        step, *_ = np.linalg.lstsq(Jz, -resid, rcond=None)
        if float(np.linalg.norm(step)) <= 1e-14:
            break
        z = z + step
    y = problem.F.value(z)
    if g.dom.distance(y) <= 1e-9 * max(1.0, float(np.linalg.norm(y))):
        return float(np.linalg.norm(z - x))
    return None  # restoration failed; skip this sample


def subgradient_distance_fn(problem: CompositeProblem):
    """dist(0, subdiff f(x)) as a callable for the subregularity sampler.

    Uses the exact chain rule  subdiff f(x) = grad phi(x) + DF(x)' subdiff
    g(F(x)) pointwise; returns None where the subdifferential is empty
    (F(x) outside dom g) or where phi is kinked so the chain rule above
    does not describe subdiff f(x).
    """
    g = problem.require_exact()
    phi = problem.phi_oracle()

    def dist(x: np.ndarray) -> float | None:
        x = np.asarray(x, dtype=float).reshape(problem.n)
        y = problem.F.value(x)
        if g.value(y).is_inf:
            return None
        # strict activity at sampled points; see subdifferential's docstring
        S = g.subdifferential(y, tol=0.0)
        Jx = problem.F.jacobian(x)
        try:
            grad_phi_x = phi.gradient(x)
        except KinkError:
            return None
        sub_f = S.linear_image(Jx.T).translate(grad_phi_x)
        return sub_f.distance(np.zeros(problem.n))

    return dist
