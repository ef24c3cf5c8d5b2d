"""Polyhedral convex functions in max-affine-plus-indicator normal form.

Every catalog member is stored as

    g(y) = max_i ( <a_i, y> + beta_i )  +  indicator(dom),

with finitely many affine pieces and a halfspace domain.  The catalog:
indicators of polyhedra, max-affine functions, the l1 and max norms,
affine functions, and finite sums of these (pieces combine by cross
sums, domains intersect).  The normal form makes the whole first- and
second-order calculus finite and exact:

  * subdifferential(y)        conv{a_i active} + normal cone of dom
  * subderivative(y)(u)       max over active pieces on the tangent cone
  * second subderivative      the 0 / +inf dichotomy on the critical set
  * parabolic subderivative   the subderivative of the (again polyhedral)
                              function  u -> subderivative(y)(u)
  * conjugate                 a single LP on the epigraph form

A BlackBoxFn carries only an evaluator; the exact routines refuse it and
only the sampling estimators accept it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .extreal import INF, ExtReal
from .lpsolve import LpProblem, lp_solve, hrep_from_generators
from .polyhedra import FEAS_TOL, PolyCone, Polyhedron

ACT_TOL = 1e-9
MAX_PIECES = 4096


class ExactCalculusUnavailable(TypeError):
    """Raised when exact polyhedral calculus is asked of a black box."""


@dataclass
class BlackBoxFn:
    """Evaluation-only extended-real function (estimators only)."""

    dim: int
    fn: Callable[[np.ndarray], float]
    name: str = "blackbox"

    def value(self, y) -> ExtReal:
        v = float(self.fn(np.asarray(y, dtype=float).reshape(self.dim)))
        return ExtReal(v)

    def value_many(self, Y: np.ndarray) -> np.ndarray:
        Y = np.asarray(Y, dtype=float)
        return np.array([float(self.fn(row)) for row in Y])


@dataclass
class PolyhedralFn:
    """max-affine + domain-indicator normal form; see module docstring."""

    pieces_A: np.ndarray  # (p, m)
    pieces_b: np.ndarray  # (p,)
    dom: Polyhedron
    kind: str = "polyhedral"
    lipschitz: float | None = None  # Lipschitz modulus on dom (None = unknown)
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        self.pieces_A = np.asarray(self.pieces_A, dtype=float)
        if self.pieces_A.ndim != 2 or self.pieces_A.shape[0] == 0:
            raise ValueError("need at least one affine piece")
        if self.pieces_A.shape[0] > MAX_PIECES:
            raise ValueError(f"too many pieces ({self.pieces_A.shape[0]} > {MAX_PIECES})")
        self.pieces_b = np.asarray(self.pieces_b, dtype=float).reshape(self.pieces_A.shape[0])
        if self.dom.dim != self.pieces_A.shape[1]:
            raise ValueError("domain dimension disagrees with the pieces")

    @property
    def dim(self) -> int:
        return self.pieces_A.shape[1]

    # -- evaluation -----------------------------------------------------

    def value(self, y) -> ExtReal:
        y = np.asarray(y, dtype=float).reshape(self.dim)
        if not self.dom.contains(y):
            return INF
        return ExtReal(float(np.max(self.pieces_A @ y + self.pieces_b)))

    def value_many(self, Y: np.ndarray) -> np.ndarray:
        """Vectorized values with +inf outside the domain, shape (N,)."""
        Y = np.asarray(Y, dtype=float)
        vals = np.max(Y @ self.pieces_A.T + self.pieces_b, axis=1)
        if self.dom.n_rows:
            res = Y @ self.dom.A.T - self.dom.b
            ub = ~self.dom.eq_mask
            bad = np.zeros(Y.shape[0], dtype=bool)
            if ub.any():
                bad |= np.max(res[:, ub], axis=1) > FEAS_TOL
            if self.dom.eq_mask.any():
                bad |= np.max(np.abs(res[:, self.dom.eq_mask]), axis=1) > FEAS_TOL
            vals = np.where(bad, np.inf, vals)
        return vals

    def active_pieces(self, y, tol: float = ACT_TOL) -> list[int]:
        y = np.asarray(y, dtype=float).reshape(self.dim)
        vals = self.pieces_A @ y + self.pieces_b
        top = float(np.max(vals))
        cut = tol * max(1.0, abs(top))
        return [i for i in range(vals.shape[0]) if top - vals[i] <= cut]

    def _require_finite(self, y) -> np.ndarray:
        y = np.asarray(y, dtype=float).reshape(self.dim)
        if not self.dom.contains(y):
            raise ValueError("point is outside the domain (value is +inf)")
        return y

    # -- first order ------------------------------------------------------

    def subdifferential(self, y, tol: float = ACT_TOL) -> Polyhedron:
        """The subdifferential at y as a halfspace polyhedron.

        ``tol`` controls piece/row activity.  The default forgives
        roundoff at anchor points; sampling sweeps pass 0.0 so that
        pieces or domain rows merely *near* active cannot inflate the
        set (a high-order tangency keeps rows within any loose cutoff
        over a fat region, not just a null set).
        """
        y = self._require_finite(y)
        act = self.active_pieces(y, tol=tol)
        V = self.pieces_A[act]
        R = self.dom.normal_cone_vrep(y, tol=tol)
        A, b, eq = hrep_from_generators(V, R if R.shape[0] else None)
        return Polyhedron(A, b, eq)

    def subderivative(self, y, u) -> ExtReal:
        """One-sided directional derivative at y in direction u."""
        y = self._require_finite(y)
        u = np.asarray(u, dtype=float).reshape(self.dim)
        if not self.dom.tangent_cone(y).contains_dir(u):
            return INF
        act = self.active_pieces(y)
        return ExtReal(float(np.max(self.pieces_A[act] @ u)))

    def derivative_fn(self, y) -> "PolyhedralFn":
        """The subderivative at y as a polyhedral function of the direction."""
        y = self._require_finite(y)
        act = self.active_pieces(y)
        T = self.dom.tangent_cone(y)
        return PolyhedralFn(
            pieces_A=self.pieces_A[act].copy(),
            pieces_b=np.zeros(len(act)),
            dom=Polyhedron(T.A.copy(), np.zeros(T.A.shape[0]), T.eq_mask.copy()),
            kind=f"derivative_of_{self.kind}",
            lipschitz=self.lipschitz,
        )

    # -- second order -------------------------------------------------------

    def second_subderivative(self, y, v, u) -> ExtReal:
        """0/+inf dichotomy: 0 iff the subderivative at y along u equals <v,u>.

        Requires v in the subdifferential at y.
        """
        y = self._require_finite(y)
        v = np.asarray(v, dtype=float).reshape(self.dim)
        u = np.asarray(u, dtype=float).reshape(self.dim)
        if not self.subdifferential(y).contains(v, 1e-7):
            raise ValueError("base vector v is not a subgradient at y")
        d = self.subderivative(y, u)
        if d.is_inf:
            return INF
        scale = max(1.0, float(np.linalg.norm(u)), float(np.linalg.norm(v)))
        if abs(d.raw - float(v @ u)) <= 1e2 * ACT_TOL * scale:
            return ExtReal(0.0)
        return INF

    def parabolic_subderivative(self, y, u, z) -> ExtReal:
        """Second-order one-sided quotient limit along u with correction z.

        Requires the subderivative at y along u to be finite; equals the
        subderivative of the derivative function (polyhedral reduction).
        """
        h = self.derivative_fn(y)
        u = np.asarray(u, dtype=float).reshape(self.dim)
        if h.value(u).is_inf:
            raise ValueError("parabolic quotient needs a direction with finite slope")
        return h.subderivative(u, z)

    def parabolic_domain(self, y, u) -> PolyCone:
        """Cone of second-order arguments with finite parabolic quotient."""
        h = self.derivative_fn(y)
        u = np.asarray(u, dtype=float).reshape(self.dim)
        if h.value(u).is_inf:
            raise ValueError("parabolic quotient needs a direction with finite slope")
        T2 = h.dom.tangent_cone(u)
        return T2

    def parabolic_conjugate_check(self, y, u, v, tol: float = 1e-8) -> dict:
        """Compare the conjugate of the parabolic quotient against the
        negated second-order dichotomy.

        lhs: sup_z [ <v,z> - parabolic(y, u, z) ]  (an LP)
        rhs: 0 when v is a subgradient at y with <v,u> equal to the slope
             along u, +inf otherwise.
        """
        y = self._require_finite(y)
        u = np.asarray(u, dtype=float).reshape(self.dim)
        v = np.asarray(v, dtype=float).reshape(self.dim)
        h = self.derivative_fn(y)
        if h.value(u).is_inf:
            raise ValueError("conjugate identity needs a direction with finite slope")
        hu = h.derivative_fn(u)  # pieces: doubly active; dom: second-order cone
        # LP: max <v,z> - s  s.t. a_i z <= s, z in dom(hu)
        m = self.dim
        p = hu.pieces_A.shape[0]
        A_rows = [np.hstack([hu.pieces_A, -np.ones((p, 1))])]
        b_rows = [np.zeros(p)]
        eqs = [np.zeros(p, dtype=bool)]
        if hu.dom.n_rows:
            A_rows.append(np.hstack([hu.dom.A, np.zeros((hu.dom.n_rows, 1))]))
            b_rows.append(np.zeros(hu.dom.n_rows))
            eqs.append(hu.dom.eq_mask)
        A_all = np.vstack(A_rows)
        b_all = np.concatenate(b_rows)
        eq_all = np.concatenate(eqs)
        c = np.concatenate([-v, [1.0]])
        res = lp_solve(
            LpProblem(
                c=c,
                A_ub=A_all[~eq_all],
                b_ub=b_all[~eq_all],
                A_eq=A_all[eq_all] if eq_all.any() else None,
                b_eq=b_all[eq_all] if eq_all.any() else None,
            )
        )
        if res.status == "optimal":
            lhs = ExtReal(-res.value)
        elif res.status == "unbounded":
            lhs = INF
        else:  # pragma: no cover - epigraph LP always feasible (z=0 works)
            raise RuntimeError("conjugate LP infeasible")

        in_subdiff = self.subdifferential(y).contains(v, 1e-7)
        slope = self.subderivative(y, u)
        pairing_ok = (
            in_subdiff
            and not slope.is_inf
            and abs(slope.raw - float(v @ u)) <= 1e2 * ACT_TOL * max(1.0, float(np.linalg.norm(u)))
        )
        rhs = ExtReal(0.0) if pairing_ok else INF
        if lhs.is_inf or rhs.is_inf:
            ok = lhs.is_inf == rhs.is_inf
        else:
            ok = abs(lhs.raw - rhs.raw) <= tol
        return {"lhs": lhs, "rhs": rhs, "ok": ok, "v_in_pairing_set": pairing_ok}

    # -- conjugate ----------------------------------------------------------

    def conjugate(self, v) -> ExtReal:
        """g*(v) = sup_y <v,y> - g(y), via the epigraph LP."""
        v = np.asarray(v, dtype=float).reshape(self.dim)
        p = self.pieces_A.shape[0]
        A_rows = [np.hstack([self.pieces_A, -np.ones((p, 1))])]
        b_rows = [-self.pieces_b]
        eqs = [np.zeros(p, dtype=bool)]
        if self.dom.n_rows:
            A_rows.append(np.hstack([self.dom.A, np.zeros((self.dom.n_rows, 1))]))
            b_rows.append(self.dom.b)
            eqs.append(self.dom.eq_mask)
        A_all = np.vstack(A_rows)
        b_all = np.concatenate(b_rows)
        eq_all = np.concatenate(eqs)
        c = np.concatenate([-v, [1.0]])
        res = lp_solve(
            LpProblem(
                c=c,
                A_ub=A_all[~eq_all],
                b_ub=b_all[~eq_all],
                A_eq=A_all[eq_all] if eq_all.any() else None,
                b_eq=b_all[eq_all] if eq_all.any() else None,
            )
        )
        if res.status == "optimal":
            return ExtReal(-res.value)
        if res.status == "unbounded":
            return INF
        raise ValueError("the function is improper (empty domain)")

    # -- constructors ---------------------------------------------------------

    @staticmethod
    def indicator(P: Polyhedron) -> "PolyhedralFn":
        return PolyhedralFn(
            pieces_A=np.zeros((1, P.dim)),
            pieces_b=np.zeros(1),
            dom=P,
            kind="indicator",
            lipschitz=0.0,
        )

    @staticmethod
    def max_affine(A: np.ndarray, b: np.ndarray, dom: Polyhedron | None = None) -> "PolyhedralFn":
        A = np.asarray(A, dtype=float)
        b = np.asarray(b, dtype=float).reshape(A.shape[0])
        return PolyhedralFn(
            pieces_A=A,
            pieces_b=b,
            dom=dom if dom is not None else Polyhedron.whole_space(A.shape[1]),
            kind="max_affine",
            lipschitz=float(np.max(np.linalg.norm(A, axis=1))),
        )

    @staticmethod
    def affine(a: np.ndarray, beta: float = 0.0) -> "PolyhedralFn":
        a = np.asarray(a, dtype=float).reshape(-1)
        return PolyhedralFn(
            pieces_A=a[None, :],
            pieces_b=np.array([beta]),
            dom=Polyhedron.whole_space(a.shape[0]),
            kind="affine",
            lipschitz=float(np.linalg.norm(a)),
        )

    @staticmethod
    def l1_norm(m: int) -> "PolyhedralFn":
        if m > 12:
            raise ValueError("l1 normal form doubles pieces per coordinate; m too large")
        signs = np.array(
            [[1.0 if (i >> k) & 1 else -1.0 for k in range(m)] for i in range(2**m)]
        )
        return PolyhedralFn(
            pieces_A=signs,
            pieces_b=np.zeros(2**m),
            dom=Polyhedron.whole_space(m),
            kind="l1",
            lipschitz=math.sqrt(m),
        )

    @staticmethod
    def max_norm(m: int) -> "PolyhedralFn":
        return PolyhedralFn(
            pieces_A=np.vstack([np.eye(m), -np.eye(m)]),
            pieces_b=np.zeros(2 * m),
            dom=Polyhedron.whole_space(m),
            kind="linf",
            lipschitz=1.0,
        )

    @staticmethod
    def sum_of(parts: list["PolyhedralFn"]) -> "PolyhedralFn":
        if not parts:
            raise ValueError("empty sum")
        dims = {p.dim for p in parts}
        if len(dims) != 1:
            raise ValueError("summands live in different spaces")
        acc = parts[0]
        for nxt in parts[1:]:
            pa = (acc.pieces_A[:, None, :] + nxt.pieces_A[None, :, :]).reshape(-1, acc.dim)
            pb = (acc.pieces_b[:, None] + nxt.pieces_b[None, :]).reshape(-1)
            if pa.shape[0] > MAX_PIECES:
                raise ValueError("piece count blow-up in sum")
            lip = None
            if acc.lipschitz is not None and nxt.lipschitz is not None:
                lip = acc.lipschitz + nxt.lipschitz
            acc = PolyhedralFn(
                pieces_A=pa,
                pieces_b=pb,
                dom=acc.dom.intersect(nxt.dom),
                kind="sum",
                lipschitz=lip,
            )
        return acc
