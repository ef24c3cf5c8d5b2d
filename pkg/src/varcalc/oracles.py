"""Smooth-function and smooth-map oracles with finite-difference fallbacks.

A SmoothOracle bundles a scalar function with optional exact gradient and
Hessian callables.  Missing derivatives are filled in by central
differences (gradient step 1e-6 * max(1, |x|), Hessian step
1e-4 * max(1, |x|), Hessian symmetrized).  The `extended` flag marks
oracles whose Hessian is meant in the extended sense: a matrix A that is
only claimed to match gradient difference quotients on a full-measure
set around the base point, with the gradient possibly undefined on an
exceptional null set (callables signal that by raising KinkError).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .expr import Expr, KinkError

GRAD_STEP_SCALE = 1e-6
HESS_STEP_SCALE = 1e-4


def _as_point(x, n: int) -> np.ndarray:
    p = np.asarray(x, dtype=float).reshape(-1)
    if p.shape != (n,):
        raise ValueError(f"expected a point of dimension {n}, got shape {p.shape}")
    return p


@dataclass
class SmoothOracle:
    """Scalar function on R^n with optional derivative callables."""

    dim_in: int
    fn: Callable[[np.ndarray], float]
    grad_fn: Callable[[np.ndarray], np.ndarray] | None = None
    hess_fn: Callable[[np.ndarray], np.ndarray] | None = None
    fn_many: Callable[[np.ndarray], np.ndarray] | None = None
    extended: bool = False

    def value(self, x) -> float:
        return float(self.fn(_as_point(x, self.dim_in)))

    def value_many(self, X: np.ndarray) -> np.ndarray:
        """Values at a stack of points, shape (N, n) -> (N,)."""
        X = np.asarray(X, dtype=float)
        if X.ndim != 2 or X.shape[1] != self.dim_in:
            raise ValueError(f"expected (N, {self.dim_in}) batch, got {X.shape}")
        if self.fn_many is not None:
            return np.asarray(self.fn_many(X), dtype=float).reshape(X.shape[0])
        return np.array([float(self.fn(row)) for row in X])

    def gradient(self, x) -> np.ndarray:
        x = _as_point(x, self.dim_in)
        if self.grad_fn is not None:
            return np.asarray(self.grad_fn(x), dtype=float).reshape(self.dim_in)
        return self._fd_gradient(x)

    def _fd_gradient(self, x: np.ndarray) -> np.ndarray:
        h = GRAD_STEP_SCALE * max(1.0, float(np.linalg.norm(x)))
        g = np.empty(self.dim_in)
        for i in range(self.dim_in):
            e = np.zeros(self.dim_in)
            e[i] = h
            g[i] = (float(self.fn(x + e)) - float(self.fn(x - e))) / (2.0 * h)
        return g

    def hessian(self, x) -> np.ndarray:
        x = _as_point(x, self.dim_in)
        if self.hess_fn is not None:
            H = np.asarray(self.hess_fn(x), dtype=float).reshape(self.dim_in, self.dim_in)
        else:
            H = self._fd_hessian(x)
        return 0.5 * (H + H.T)

    def _fd_hessian(self, x: np.ndarray) -> np.ndarray:
        h = HESS_STEP_SCALE * max(1.0, float(np.linalg.norm(x)))
        H = np.empty((self.dim_in, self.dim_in))
        for i in range(self.dim_in):
            e = np.zeros(self.dim_in)
            e[i] = h
            H[i, :] = (self.gradient(x + e) - self.gradient(x - e)) / (2.0 * h)
        return H

    # -- constructors ---------------------------------------------------

    @staticmethod
    def zero(n: int) -> "SmoothOracle":
        return SmoothOracle(
            dim_in=n,
            fn=lambda x: 0.0,
            grad_fn=lambda x: np.zeros(n),
            hess_fn=lambda x: np.zeros((n, n)),
            fn_many=lambda X: np.zeros(X.shape[0]),
        )

    @staticmethod
    def quadratic(Q: np.ndarray, c: np.ndarray | None = None, const: float = 0.0) -> "SmoothOracle":
        """0.5 x'Qx + c'x + const with exact derivatives."""
        Q = np.asarray(Q, dtype=float)
        n = Q.shape[0]
        Qs = 0.5 * (Q + Q.T)
        cv = np.zeros(n) if c is None else np.asarray(c, dtype=float).reshape(n)
        return SmoothOracle(
            dim_in=n,
            fn=lambda x: 0.5 * float(x @ Qs @ x) + float(cv @ x) + const,
            grad_fn=lambda x: Qs @ x + cv,
            hess_fn=lambda x: Qs.copy(),
            fn_many=lambda X: 0.5 * np.einsum("ij,jk,ik->i", X, Qs, X) + X @ cv + const,
        )

    @staticmethod
    def from_expr(expr: Expr, n: int) -> "SmoothOracle":
        return SmoothOracle(
            dim_in=n,
            fn=lambda x: float(expr.eval(np.asarray(x, dtype=float))),
            grad_fn=lambda x: expr.eval_grad(x)[1],
            fn_many=lambda X: np.asarray(expr.eval(X), dtype=float).reshape(X.shape[0]),
        )


@dataclass
class SmoothMap:
    """Map F: R^n -> R^m built from component oracles."""

    components: Sequence[SmoothOracle]

    def __post_init__(self):
        dims = {c.dim_in for c in self.components}
        if len(self.components) == 0:
            raise ValueError("a map needs at least one component")
        if len(dims) != 1:
            raise ValueError(f"component input dimensions disagree: {sorted(dims)}")

    @property
    def dim_in(self) -> int:
        return self.components[0].dim_in

    @property
    def dim_out(self) -> int:
        return len(self.components)

    def value(self, x) -> np.ndarray:
        return np.array([c.value(x) for c in self.components])

    def value_many(self, X: np.ndarray) -> np.ndarray:
        """(N, n) -> (N, m)."""
        return np.column_stack([c.value_many(X) for c in self.components])

    def jacobian(self, x) -> np.ndarray:
        """(m, n) matrix of component gradients."""
        return np.vstack([c.gradient(x) for c in self.components])

    def hessians(self, x) -> list[np.ndarray]:
        return [c.hessian(x) for c in self.components]

    def quadratic_term(self, x, w) -> np.ndarray:
        """The m-vector of second-order terms (w' H_k w)_k at x."""
        w = _as_point(w, self.dim_in)
        return np.array([float(w @ H @ w) for H in self.hessians(x)])

    def combined_hessian(self, x, y) -> np.ndarray:
        """sum_k y_k * H_k(x), the constraint part of a Lagrangian Hessian."""
        y = np.asarray(y, dtype=float).reshape(self.dim_out)
        out = np.zeros((self.dim_in, self.dim_in))
        for yk, H in zip(y, self.hessians(x)):
            out += yk * H
        return out

    @staticmethod
    def identity(n: int) -> "SmoothMap":
        comps = []
        for i in range(n):
            e = np.zeros(n)
            e[i] = 1.0
            comps.append(
                SmoothOracle(
                    dim_in=n,
                    fn=lambda x, i=i: float(x[i]),
                    grad_fn=lambda x, e=e: e.copy(),
                    hess_fn=lambda x, n=n: np.zeros((n, n)),
                    fn_many=lambda X, i=i: X[:, i].copy(),
                )
            )
        return SmoothMap(comps)

    @staticmethod
    def from_exprs(exprs: Sequence[Expr], n: int) -> "SmoothMap":
        return SmoothMap([SmoothOracle.from_expr(e, n) for e in exprs])


@dataclass
class ResidualProfile:
    """Gradient-quotient residuals of a candidate (extended) Hessian.

    For each probe radius r: the max over sampled points x with
    |x - base| = r and a defined gradient of
        |grad(x) - grad(base) - A (x - base)| / |x - base|,
    plus how many samples had to be skipped for hitting nonsmooth points.
    Residuals tending to zero support the candidate matrix on the sample;
    they can never certify it (finite samples cannot see a null set).
    """

    radii: list[float]
    max_residuals: list[float]
    skipped: list[int]

    @property
    def tail_residual(self) -> float:
        return self.max_residuals[-1]

    def is_decreasing(self, slack: float = 1.5) -> bool:
        """Loosely monotone: each entry at most `slack` times the previous."""
        r = self.max_residuals
        return all(r[i + 1] <= slack * r[i] + 1e-15 for i in range(len(r) - 1))


def extended_hessian_residual(
    oracle: SmoothOracle,
    x_bar,
    A: np.ndarray,
    radii: Sequence[float] | None = None,
    samples_per_radius: int = 32,
    seed: int = 0,
) -> ResidualProfile:
    """Probe whether A matches gradient difference quotients near x_bar.

    Samples points on spheres of shrinking radius, skipping any sample
    where the oracle's gradient raises KinkError (the exceptional null
    set of an extended Hessian).
    """
    n = oracle.dim_in
    x_bar = _as_point(x_bar, n)
    A = np.asarray(A, dtype=float).reshape(n, n)
    if radii is None:
        radii = [10.0 ** (-k) for k in range(1, 7)]
    g0 = oracle.gradient(x_bar)

    from scipy.stats import qmc

    if n == 1:
        dirs = np.array([[1.0], [-1.0]])
    else:
        sampler = qmc.Halton(d=n, scramble=True, seed=seed)
        raw = sampler.random(max(4, samples_per_radius)) - 0.5
        norms = np.linalg.norm(raw, axis=1)
        keep = norms > 1e-12
        dirs = raw[keep] / norms[keep, None]

    max_res: list[float] = []
    skipped: list[int] = []
    for r in radii:
        worst = 0.0
        skip = 0
        for d in dirs:
            x = x_bar + r * d
            try:
                g = oracle.gradient(x)
            except KinkError:
                skip += 1
                continue
            res = float(np.linalg.norm(g - g0 - A @ (x - x_bar))) / r
            worst = max(worst, res)
        max_res.append(worst)
        skipped.append(skip)
    return ResidualProfile(list(map(float, radii)), max_res, skipped)
