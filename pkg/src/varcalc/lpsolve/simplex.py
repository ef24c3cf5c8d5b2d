"""Two-phase dense primal simplex with Bland's rule and certificates.

Solves   min c'x   s.t.  A_ub x <= b_ub,  A_eq x = b_eq,  x free.

Free variables are split internally (x = u - w with u, w >= 0).  Every
terminal status carries a certificate that is re-verified numerically
before the result is returned:

  * optimal    -- weak duality: primal and dual objective agree to 1e-8
  * unbounded  -- a ray r with A_ub r <= 0, A_eq r = 0, c'r < 0
  * infeasible -- a Farkas vector y with y_ub >= 0,
                  A_ub'y_ub + A_eq'y_eq = 0 and b'y < 0

Bland's pivoting (lowest eligible index in, lowest basic index out on
ratio ties) makes the solver cycle-free and bit-deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

RED_COST_TOL = 1e-9
PIVOT_TOL = 1e-12
CERT_TOL = 1e-8
MAX_ITERS = 20000


class LpNumericalError(RuntimeError):
    """The simplex stalled or a certificate failed to verify."""


@dataclass
class LpProblem:
    c: np.ndarray
    A_ub: np.ndarray | None = None
    b_ub: np.ndarray | None = None
    A_eq: np.ndarray | None = None
    b_eq: np.ndarray | None = None

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=float).reshape(-1)
        n = self.c.shape[0]
        if self.A_ub is not None:
            self.A_ub = np.asarray(self.A_ub, dtype=float).reshape(-1, n)
            self.b_ub = np.asarray(self.b_ub, dtype=float).reshape(self.A_ub.shape[0])
        else:
            self.A_ub = np.zeros((0, n))
            self.b_ub = np.zeros(0)
        if self.A_eq is not None:
            self.A_eq = np.asarray(self.A_eq, dtype=float).reshape(-1, n)
            self.b_eq = np.asarray(self.b_eq, dtype=float).reshape(self.A_eq.shape[0])
        else:
            self.A_eq = np.zeros((0, n))
            self.b_eq = np.zeros(0)

    @property
    def n(self) -> int:
        return self.c.shape[0]


@dataclass
class LpResult:
    status: str  # "optimal" | "infeasible" | "unbounded"
    x: np.ndarray | None = None
    value: float | None = None
    dual_ub: np.ndarray | None = None
    dual_eq: np.ndarray | None = None
    ray: np.ndarray | None = None
    farkas_ub: np.ndarray | None = None
    farkas_eq: np.ndarray | None = None


class _Tableau:
    """Standard-form tableau  min c'z, Az = b (b >= 0), z >= 0."""

    def __init__(self, A: np.ndarray, b: np.ndarray):
        k, N = A.shape
        flip = b < 0
        A = A.copy()
        b = b.copy()
        A[flip] *= -1.0
        b[flip] *= -1.0
        self.flip = flip
        # columns: [structural | artificial identity]
        self.T = np.hstack([A, np.eye(k), b[:, None]])
        self.n_struct = N
        self.k = k
        self.basis = list(range(N, N + k))  # all-artificial start

    def _pivot(self, row: int, col: int) -> None:
        T = self.T
        piv = T[row, col]
        if abs(piv) < PIVOT_TOL:
            raise LpNumericalError(f"pivot magnitude {abs(piv):.2e} below {PIVOT_TOL:.0e}")
        T[row] = T[row] / piv
        for r in range(self.k):
            if r != row and T[r, col] != 0.0:
                T[r] -= T[r, col] * T[row]
        self.basis[row] = col

    def _reduced_costs(self, cost: np.ndarray) -> np.ndarray:
        cb = cost[self.basis]
        return cost - cb @ self.T[:, :-1]

    def run(self, cost: np.ndarray, allowed: np.ndarray) -> str:
        """Bland simplex on the given cost; returns 'optimal' or 'unbounded'.

        `allowed` masks the columns permitted to enter the basis.
        """
        for _ in range(MAX_ITERS):
            red = self._reduced_costs(cost)
            enter = -1
            for j in range(red.shape[0]):
                if allowed[j] and red[j] < -RED_COST_TOL:
                    enter = j
                    break
            if enter < 0:
                return "optimal"
            col = self.T[:, enter]
            rhs = self.T[:, -1]
            best_ratio = np.inf
            leave = -1
            for r in range(self.k):
                if col[r] > PIVOT_TOL:
                    ratio = rhs[r] / col[r]
                    if ratio < best_ratio - 1e-12 or (
                        abs(ratio - best_ratio) <= 1e-12
                        and (leave < 0 or self.basis[r] < self.basis[leave])
                    ):
                        best_ratio = ratio
                        leave = r
            if leave < 0:
                self._ray_col = enter
                return "unbounded"
            self._pivot(leave, enter)
        raise LpNumericalError("simplex iteration limit hit (numerical stall?)")

    def solution(self) -> np.ndarray:
        z = np.zeros(self.T.shape[1] - 1)
        z[self.basis] = self.T[:, -1]
        return z

    def duals(self, cost: np.ndarray) -> np.ndarray:
        """Simplex multipliers w.r.t. the (sign-flipped) standard rows."""
        cb = cost[self.basis]
        # artificial columns hold B^{-1}; pi = c_B B^{-1}
        return cb @ self.T[:, self.n_struct : self.n_struct + self.k]

    def ray(self) -> np.ndarray:
        d = np.zeros(self.T.shape[1] - 1)
        d[self._ray_col] = 1.0
        col = self.T[:, self._ray_col]
        for r in range(self.k):
            d[self.basis[r]] = -col[r]
        return d


def lp_solve(prob: LpProblem) -> LpResult:
    """Solve the LP, returning a status with a verified certificate."""
    n = prob.n
    k_ub = prob.A_ub.shape[0]
    k_eq = prob.A_eq.shape[0]
    k = k_ub + k_eq

    # standard form columns: u (n), w (n), slack (k_ub)
    A_rows = np.vstack([prob.A_ub, prob.A_eq]) if k else np.zeros((0, n))
    b_all = np.concatenate([prob.b_ub, prob.b_eq])
    S = np.vstack([np.eye(k_ub), np.zeros((k_eq, k_ub))]) if k else np.zeros((0, 0))
    A_std = np.hstack([A_rows, -A_rows, S])
    N = A_std.shape[1]

    if k == 0:
        # unconstrained: bounded only if c == 0
        if np.allclose(prob.c, 0.0):
            return LpResult(status="optimal", x=np.zeros(n), value=0.0,
                            dual_ub=np.zeros(0), dual_eq=np.zeros(0))
        r = -prob.c / np.linalg.norm(prob.c)
        return LpResult(status="unbounded", ray=r)

    tab = _Tableau(A_std, b_all)
    n_tot = N + k  # structural + artificial

    # phase 1: drive artificials to zero
    cost1 = np.concatenate([np.zeros(N), np.ones(k)])
    allowed1 = np.ones(n_tot, dtype=bool)
    status = tab.run(cost1, allowed1)
    if status != "optimal":  # pragma: no cover - phase 1 is always bounded
        raise LpNumericalError("phase 1 reported unbounded")
    z = tab.solution()
    phase1_val = float(np.sum(z[N:]))
    if phase1_val > CERT_TOL:
        pi = tab.duals(cost1)
        sigma = np.where(tab.flip, -1.0, 1.0)
        y = -sigma * pi  # multipliers on the original rows
        y_ub, y_eq = y[:k_ub], y[k_ub:]
        y_ub = np.maximum(y_ub, 0.0)  # clip roundoff
        comb = prob.A_ub.T @ y_ub + prob.A_eq.T @ y_eq
        gap = float(prob.b_ub @ y_ub + prob.b_eq @ y_eq)
        scale = 1.0 + float(np.abs(y).max(initial=0.0))
        if np.abs(comb).max(initial=0.0) > CERT_TOL * scale or gap >= -CERT_TOL * scale:
            raise LpNumericalError("Farkas certificate failed verification")
        return LpResult(status="infeasible", farkas_ub=y_ub, farkas_eq=y_eq)

    # pivot artificials still in the basis out (or their rows are redundant)
    for r in range(tab.k):
        if tab.basis[r] >= N:
            for j in range(N):
                if abs(tab.T[r, j]) > 1e-9:
                    tab._pivot(r, j)
                    break

    # phase 2 on the true cost; artificials barred from entering
    cost2 = np.concatenate([prob.c, -prob.c, np.zeros(k_ub), np.zeros(k)])
    allowed2 = np.concatenate([np.ones(N, dtype=bool), np.zeros(k, dtype=bool)])
    status = tab.run(cost2, allowed2)

    if status == "unbounded":
        d = tab.ray()
        r_x = d[:n] - d[n : 2 * n]
        viol = prob.A_ub @ r_x if k_ub else np.zeros(0)
        eqv = prob.A_eq @ r_x if k_eq else np.zeros(0)
        drop = float(prob.c @ r_x)
        nr = float(np.linalg.norm(r_x))
        if nr < 1e-12:
            raise LpNumericalError("unbounded ray degenerate in original variables")
        r_x /= nr
        if (
            np.max(viol, initial=0.0) > CERT_TOL
            or np.abs(eqv).max(initial=0.0) > CERT_TOL
            or drop >= -CERT_TOL * nr
        ):
            raise LpNumericalError("unbounded-ray certificate failed verification")
        return LpResult(status="unbounded", ray=r_x)

    z = tab.solution()
    x = z[:n] - z[n : 2 * n]
    value = float(prob.c @ x)
    pi = tab.duals(cost2)
    sigma = np.where(tab.flip, -1.0, 1.0)
    lam = sigma * pi  # multipliers on original rows; ub rows need lam <= 0
    dual_ub = -lam[:k_ub]  # conventional nonnegative ub multipliers
    dual_eq = -lam[k_ub:]
    dual_val = float(-(prob.b_ub @ dual_ub + prob.b_eq @ dual_eq))
    scale = 1.0 + abs(value)
    if abs(value - dual_val) > CERT_TOL * scale:
        raise LpNumericalError(
            f"weak duality violated: primal {value:.12g} vs dual {dual_val:.12g}"
        )
    return LpResult(
        status="optimal", x=x, value=value, dual_ub=dual_ub, dual_eq=dual_eq
    )
