"""Halfspace polyhedra with first- and second-order tangent structure.

A Polyhedron is {y : A y <= b} with an optional equality mask per row.
Activity decisions use the package-wide absolute feasibility tolerance
FEAS_TOL = 1e-9 per row.  Tangent cones and second-order tangent sets
are the standard active-row constructions, exact for polyhedral sets:

    T(y)      = {u : A_i u <= 0 for active rows i}
    T2(y, u)  = {z : A_i z <= 0 for rows i active at y with A_i u = 0}

Equality rows stay equality rows in both.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .lpsolve import (
    LpProblem,
    lp_solve,
    vertex_enumerate,
    hrep_from_generators,
    project_onto_polyhedron,
    VRep,
)

FEAS_TOL = 1e-9


@dataclass
class Polyhedron:
    A: np.ndarray
    b: np.ndarray
    eq_mask: np.ndarray | None = None
    _vrep: VRep | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        self.A = np.asarray(self.A, dtype=float)
        if self.A.ndim != 2:
            raise ValueError("A must be a matrix (k rows, dim columns)")
        self.b = np.asarray(self.b, dtype=float).reshape(self.A.shape[0])
        if self.eq_mask is None:
            self.eq_mask = np.zeros(self.A.shape[0], dtype=bool)
        else:
            self.eq_mask = np.asarray(self.eq_mask, dtype=bool).reshape(self.A.shape[0])

    # -- basic queries --------------------------------------------------

    @property
    def dim(self) -> int:
        return self.A.shape[1]

    @property
    def n_rows(self) -> int:
        return self.A.shape[0]

    def residuals(self, y) -> np.ndarray:
        y = np.asarray(y, dtype=float).reshape(self.dim)
        return self.A @ y - self.b

    def contains(self, y, tol: float = FEAS_TOL) -> bool:
        r = self.residuals(y)
        ok_ub = r[~self.eq_mask].max(initial=-np.inf) <= tol
        ok_eq = np.abs(r[self.eq_mask]).max(initial=0.0) <= tol
        return bool(ok_ub and ok_eq)

    def active_rows(self, y, tol: float = FEAS_TOL) -> list[int]:
        """Rows tight at y (equality rows are always active)."""
        r = self.residuals(y)
        return [
            i
            for i in range(self.n_rows)
            if self.eq_mask[i] or abs(r[i]) <= tol
        ]

    def is_empty(self) -> bool:
        res = lp_solve(
            LpProblem(
                c=np.zeros(self.dim),
                A_ub=self.A[~self.eq_mask] if np.any(~self.eq_mask) else None,
                b_ub=self.b[~self.eq_mask] if np.any(~self.eq_mask) else None,
                A_eq=self.A[self.eq_mask] if np.any(self.eq_mask) else None,
                b_eq=self.b[self.eq_mask] if np.any(self.eq_mask) else None,
            )
        )
        return res.status == "infeasible"

    def some_point(self) -> np.ndarray:
        res = lp_solve(
            LpProblem(
                c=np.zeros(self.dim),
                A_ub=self.A[~self.eq_mask] if np.any(~self.eq_mask) else None,
                b_ub=self.b[~self.eq_mask] if np.any(~self.eq_mask) else None,
                A_eq=self.A[self.eq_mask] if np.any(self.eq_mask) else None,
                b_eq=self.b[self.eq_mask] if np.any(self.eq_mask) else None,
            )
        )
        if res.status != "optimal":
            raise ValueError("polyhedron is empty")
        return res.x

    # -- geometry --------------------------------------------------------

    def project(self, x) -> "ProjectionOutcome":
        r = project_onto_polyhedron(self.A, self.b, np.asarray(x, dtype=float), self.eq_mask)
        return ProjectionOutcome(point=r.point, distance=r.distance, active_rows=r.active_rows)

    def distance(self, x) -> float:
        return self.project(x).distance

    def vrep(self) -> VRep:
        if self._vrep is None:
            self._vrep = vertex_enumerate(self.A, self.b, self.eq_mask)
        return self._vrep

    def linear_image(self, M: np.ndarray) -> "Polyhedron":
        """The image {M y : y in self} as a halfspace polyhedron."""
        M = np.asarray(M, dtype=float)
        v = self.vrep()
        if v.is_empty:
            raise ValueError("cannot map an empty polyhedron")
        V = v.vertices @ M.T
        R = v.rays @ M.T if v.rays.shape[0] else None
        L = v.lines @ M.T if v.lines.shape[0] else None
        if L is not None:
            L = L[np.linalg.norm(L, axis=1) > 1e-12]
            if L.shape[0] == 0:
                L = None
        if R is not None:
            R = R[np.linalg.norm(R, axis=1) > 1e-12]
            if R.shape[0] == 0:
                R = None
        A, b, eq = hrep_from_generators(V, R, L)
        return Polyhedron(A, b, eq)

    def translate(self, t: np.ndarray) -> "Polyhedron":
        t = np.asarray(t, dtype=float).reshape(self.dim)
        return Polyhedron(self.A.copy(), self.b + self.A @ t, self.eq_mask.copy())

    def intersect(self, other: "Polyhedron") -> "Polyhedron":
        if other.dim != self.dim:
            raise ValueError("dimension mismatch")
        return Polyhedron(
            np.vstack([self.A, other.A]),
            np.concatenate([self.b, other.b]),
            np.concatenate([self.eq_mask, other.eq_mask]),
        )

    # -- tangent structure ------------------------------------------------

    def tangent_cone(self, y, tol: float = FEAS_TOL) -> "PolyCone":
        if not self.contains(y, max(tol, FEAS_TOL)):
            raise ValueError("tangent cone requested at a point outside the set")
        act = self.active_rows(y, tol)
        return PolyCone(self.A[act].copy(), self.eq_mask[act].copy())

    def second_order_tangent_set(self, y, u, tol: float = FEAS_TOL) -> "PolyCone":
        """T2(y, u); requires u in T(y)."""
        T = self.tangent_cone(y, tol)
        if not T.contains_dir(u, 1e2 * tol):
            raise ValueError("second-order tangent set requested for a non-tangent direction")
        u = np.asarray(u, dtype=float).reshape(self.dim)
        rows = [
            i
            for i in range(T.A.shape[0])
            if T.eq_mask[i] or abs(float(T.A[i] @ u)) <= tol * max(1.0, float(np.abs(u).max()))
        ]
        return PolyCone(T.A[rows].copy(), T.eq_mask[rows].copy())

    def normal_cone_vrep(self, y, tol: float = FEAS_TOL) -> np.ndarray:
        """Generating rays of the normal cone at y (rows; eq rows give both signs).

        ``tol`` is the row-activity cutoff; pass 0.0 for exact float
        activity (sampling sweeps use this so that rows merely *near*
        tight cannot inflate the cone).
        """
        act = self.active_rows(y, tol=tol)
        rays = []
        for i in act:
            if float(np.linalg.norm(self.A[i])) <= 1e-12:
                continue  # an all-zero row generates nothing
            rays.append(self.A[i])
            if self.eq_mask[i]:
                rays.append(-self.A[i])
        return np.array(rays).reshape(-1, self.dim)

    # -- serialization ----------------------------------------------------

    def to_obj(self) -> dict:
        out = {"A": self.A.tolist(), "b": self.b.tolist()}
        if np.any(self.eq_mask):
            out["eq"] = [bool(v) for v in self.eq_mask]
        return out

    @staticmethod
    def from_obj(obj: dict, dim: int | None = None, path: str = "polyhedron") -> "Polyhedron":
        if not isinstance(obj, dict):
            raise ValueError(f"{path}: expected an object with keys A, b")
        unknown = set(obj) - {"A", "b", "eq"}
        if unknown:
            raise ValueError(f"{path}: unknown keys {sorted(unknown)}")
        if "A" not in obj or "b" not in obj:
            raise ValueError(f"{path}: both A and b are required")
        A = np.asarray(obj["A"], dtype=float)
        if A.ndim == 1:
            A = A.reshape(len(obj["b"]), -1)
        b = np.asarray(obj["b"], dtype=float)
        if A.shape[0] != b.shape[0]:
            raise ValueError(f"{path}: A has {A.shape[0]} rows but b has {b.shape[0]} entries")
        if dim is not None and A.shape[1] != dim:
            raise ValueError(f"{path}: expected dimension {dim}, got {A.shape[1]}")
        eq = obj.get("eq")
        if eq is not None:
            if len(eq) != A.shape[0] or not all(isinstance(v, bool) for v in eq):
                raise ValueError(f"{path}.eq: need one boolean per row")
            eq = np.asarray(eq, dtype=bool)
        return Polyhedron(A, b, eq)

    # -- constructors -------------------------------------------------------

    @staticmethod
    def whole_space(dim: int) -> "Polyhedron":
        return Polyhedron(np.zeros((0, dim)), np.zeros(0))

    @staticmethod
    def nonpositive_orthant(dim: int) -> "Polyhedron":
        return Polyhedron(np.eye(dim), np.zeros(dim))

    @staticmethod
    def nonnegative_orthant(dim: int) -> "Polyhedron":
        return Polyhedron(-np.eye(dim), np.zeros(dim))

    @staticmethod
    def box(lo, hi) -> "Polyhedron":
        lo = np.asarray(lo, dtype=float)
        hi = np.asarray(hi, dtype=float)
        d = lo.shape[0]
        return Polyhedron(
            np.vstack([np.eye(d), -np.eye(d)]),
            np.concatenate([hi, -lo]),
        )


@dataclass
class ProjectionOutcome:
    point: np.ndarray
    distance: float
    active_rows: list[int]


class PolyCone(Polyhedron):
    """A polyhedral cone {u : A u <= 0 (= on eq rows)}."""

    def __init__(self, A: np.ndarray, eq_mask: np.ndarray | None = None):
        A = np.asarray(A, dtype=float)
        super().__init__(A, np.zeros(A.shape[0]), eq_mask)

    def contains_dir(self, u, tol: float = FEAS_TOL) -> bool:
        """Membership scaled by |u| (cones are scale-invariant)."""
        u = np.asarray(u, dtype=float).reshape(self.dim)
        scale = max(1.0, float(np.linalg.norm(u)))
        return self.contains(u, tol * scale)

    def generator_rays(self) -> np.ndarray:
        """A plain conic generating set (rays plus +-lines)."""
        v = self.vrep()
        return v.all_rays()

    def is_trivial(self) -> bool:
        """True when the cone is exactly {0}."""
        v = self.vrep()
        return v.rays.shape[0] == 0 and v.lines.shape[0] == 0

    def polar_rays(self) -> np.ndarray:
        """Generating rays of the polar cone {v : <v,u> <= 0 on the cone}."""
        gens = self.generator_rays()
        if gens.shape[0] == 0:
            return np.vstack([np.eye(self.dim), -np.eye(self.dim)])
        from .lpsolve import cone_generators

        rays, lines = cone_generators(gens, self.dim)
        out = [rays] if rays.shape[0] else []
        if lines.shape[0]:
            out.extend([lines, -lines])
        if not out:
            return np.zeros((0, self.dim))
        return np.vstack(out)
