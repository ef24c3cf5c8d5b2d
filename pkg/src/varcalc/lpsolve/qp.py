"""Euclidean projection onto a polyhedron by a primal active-set method.

min 0.5 |y - x|^2  s.t.  A y <= b (rows), A y = b on eq_mask rows.

The Hessian is the identity, so every equality-constrained subproblem is
a closed-form least-squares projection.  A feasible start comes from a
phase-1 LP; blocking rows enter by lowest index, rows with negative
multipliers leave by lowest index.  The returned point carries a
verified KKT certificate (feasibility and stationarity residuals), which
for a convex problem certifies global optimality.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .simplex import LpProblem, LpNumericalError, lp_solve

KKT_TOL = 1e-8
ACT_TOL = 1e-9
MAX_AS_ITERS = 500


@dataclass
class ProjectionResult:
    point: np.ndarray
    distance: float
    active_rows: list[int]


def _feasible_start(A, b, eq_mask) -> np.ndarray:
    n = A.shape[1]
    res = lp_solve(
        LpProblem(
            c=np.zeros(n),
            A_ub=A[~eq_mask] if np.any(~eq_mask) else None,
            b_ub=b[~eq_mask] if np.any(~eq_mask) else None,
            A_eq=A[eq_mask] if np.any(eq_mask) else None,
            b_eq=b[eq_mask] if np.any(eq_mask) else None,
        )
    )
    if res.status == "infeasible":
        raise ValueError("cannot project onto an empty polyhedron")
    if res.status != "optimal":  # pragma: no cover
        raise LpNumericalError(f"feasibility LP returned {res.status}")
    return res.x


def project_onto_polyhedron(
    A: np.ndarray,
    b: np.ndarray,
    x: np.ndarray,
    eq_mask: np.ndarray | None = None,
) -> ProjectionResult:
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float).reshape(-1)
    x = np.asarray(x, dtype=float).reshape(-1)
    if A.ndim != 2 or A.shape[1] != x.shape[0]:
        raise ValueError("A, x dimension mismatch")
    k, n = A.shape
    if eq_mask is None:
        eq_mask = np.zeros(k, dtype=bool)
    eq_rows = [i for i in range(k) if eq_mask[i]]
    ub_rows = [i for i in range(k) if not eq_mask[i]]

    if k == 0:
        return ProjectionResult(point=x.copy(), distance=0.0, active_rows=[])

    # already feasible?  (common case in the samplers)
    if (
        (A[ub_rows] @ x - b[ub_rows]).max(initial=-np.inf) <= ACT_TOL
        and np.abs(A[eq_rows] @ x - b[eq_rows]).max(initial=0.0) <= ACT_TOL
    ):
        return ProjectionResult(point=x.copy(), distance=0.0, active_rows=[])

    y = _feasible_start(A, b, eq_mask)
    W: list[int] = list(eq_rows)

    def _eqp(work: list[int]) -> tuple[np.ndarray, np.ndarray]:
        if not work:
            return x.copy(), np.zeros(0)
        G = A[work]
        rhs = G @ x - b[work]
        nu, *_ = np.linalg.lstsq(G @ G.T, rhs, rcond=None)
        return x - G.T @ nu, nu

    for _ in range(MAX_AS_ITERS):
        target, nu = _eqp(W)
        d = target - y
        if np.linalg.norm(d) <= 1e-11 * max(1.0, np.linalg.norm(x)):
            # candidate stationary point: inequality multipliers must be >= 0
            bad = [
                idx
                for idx, row in enumerate(W)
                if not eq_mask[row] and nu[idx] < -1e-10
            ]
            if not bad:
                break
            W.pop(min(bad))
            continue
        # ratio test against rows not in the working set
        alpha = 1.0
        blocker = -1
        for i in ub_rows:
            if i in W:
                continue
            ad = float(A[i] @ d)
            if ad > 1e-12:
                room = (b[i] - float(A[i] @ y)) / ad
                if room < alpha - 1e-12:
                    alpha = max(room, 0.0)
                    blocker = i
                elif abs(room - alpha) <= 1e-12 and blocker >= 0 and i < blocker:
                    blocker = i
        y = y + alpha * d
        if blocker >= 0:
            W.append(blocker)
            W.sort()
        # alpha == 1 with no blocker: y == target; loop closes via the d ~ 0 branch
    else:
        raise LpNumericalError("active-set projection failed to converge")

    y = target
    # verified KKT certificate
    feas_ub = (A[ub_rows] @ y - b[ub_rows]).max(initial=-np.inf)
    feas_eq = np.abs(A[eq_rows] @ y - b[eq_rows]).max(initial=0.0)
    if feas_ub > 1e2 * ACT_TOL or feas_eq > 1e2 * ACT_TOL:
        raise LpNumericalError("projection feasibility check failed")
    if W:
        station = np.linalg.norm(x - y - A[W].T @ nu)
    else:
        station = np.linalg.norm(x - y)
    if station > KKT_TOL * max(1.0, np.linalg.norm(x)):
        raise LpNumericalError("projection stationarity check failed")
    active = [i for i in range(k) if abs(float(A[i] @ y) - b[i]) <= 1e2 * ACT_TOL]
    return ProjectionResult(point=y, distance=float(np.linalg.norm(x - y)), active_rows=active)
