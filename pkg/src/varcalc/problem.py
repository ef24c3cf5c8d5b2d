"""Composite problems: smooth-plus-polyhedral-composite objectives.

    f(x) = phi(x) + g(F(x)),   phi smooth, F a smooth map, g polyhedral
                               (or an evaluation-only black box).

The base point and the base subgradient anchor all second-order objects.
The stored base subgradient is the one for the composite part: at a
stationary base point it equals -grad phi(x_bar), which is the default
when none is given.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .extreal import ExtReal
from .oracles import SmoothMap, SmoothOracle
from .polyfun import BlackBoxFn, ExactCalculusUnavailable, PolyhedralFn


@dataclass
class BasePointData:
    """Everything the calculus needs at the base point, computed once."""

    F0: np.ndarray  # F(x_bar), (m,)
    J: np.ndarray  # Jacobian of F at x_bar, (m, n)
    F_hessians: list[np.ndarray]  # component Hessians at x_bar
    grad_phi: np.ndarray  # (n,)
    hess_phi: np.ndarray  # (n, n)

    def quadratic_term(self, w: np.ndarray) -> np.ndarray:
        """(w' H_k w)_k across components."""
        w = np.asarray(w, dtype=float)
        return np.array([float(w @ H @ w) for H in self.F_hessians])

    def multiplier_hessian(self, y: np.ndarray) -> np.ndarray:
        """hess_phi + sum_k y_k H_k: the full second-order model matrix."""
        out = self.hess_phi.copy()
        for yk, H in zip(np.asarray(y, dtype=float), self.F_hessians):
            out += yk * H
        return out


@dataclass
class CompositeProblem:
    F: SmoothMap
    g: PolyhedralFn | BlackBoxFn
    x_bar: np.ndarray
    phi: SmoothOracle | None = None
    v_bar: np.ndarray | None = None
    name: str = "problem"
    _base: BasePointData | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        self.x_bar = np.asarray(self.x_bar, dtype=float).reshape(-1)
        n = self.F.dim_in
        if self.x_bar.shape != (n,):
            raise ValueError(f"base point must have dimension {n}")
        if self.phi is not None and self.phi.dim_in != n:
            raise ValueError("phi and F input dimensions disagree")
        if self.g.dim != self.F.dim_out:
            raise ValueError("g dimension disagrees with the range of F")
        if self.v_bar is not None:
            self.v_bar = np.asarray(self.v_bar, dtype=float).reshape(n)

    @property
    def n(self) -> int:
        return self.F.dim_in

    @property
    def m(self) -> int:
        return self.F.dim_out

    @property
    def is_exact(self) -> bool:
        return isinstance(self.g, PolyhedralFn)

    def require_exact(self) -> PolyhedralFn:
        if not isinstance(self.g, PolyhedralFn):
            raise ExactCalculusUnavailable(
                "the composite part is a black box; only the sampling "
                "estimators apply"
            )
        return self.g

    def phi_oracle(self) -> SmoothOracle:
        return self.phi if self.phi is not None else SmoothOracle.zero(self.n)

    def base(self) -> BasePointData:
        if self._base is None:
            ph = self.phi_oracle()
            self._base = BasePointData(
                F0=self.F.value(self.x_bar),
                J=self.F.jacobian(self.x_bar),
                F_hessians=self.F.hessians(self.x_bar),
                grad_phi=ph.gradient(self.x_bar),
                hess_phi=ph.hessian(self.x_bar),
            )
        return self._base

    def base_subgradient(self) -> np.ndarray:
        """The composite-part base subgradient (default -grad phi(x_bar))."""
        if self.v_bar is not None:
            return self.v_bar
        return -self.base().grad_phi

    # -- evaluation -----------------------------------------------------

    def f_value(self, x) -> ExtReal:
        x = np.asarray(x, dtype=float).reshape(self.n)
        gval = self.g.value(self.F.value(x))
        if gval.is_inf:
            return gval
        return ExtReal(self.phi_oracle().value(x) + gval.raw)

    def f_value_many(self, X: np.ndarray) -> np.ndarray:
        """Batch objective values with +inf outside the domain, shape (N,)."""
        X = np.asarray(X, dtype=float)
        if X.ndim != 2:
            raise ValueError("expected an (N, n) batch")
        Y = self.F.value_many(X)
        gvals = self.g.value_many(Y)
        phis = self.phi_oracle().value_many(X)
        return phis + gvals

    def psi_value(self, x) -> ExtReal:
        x = np.asarray(x, dtype=float).reshape(self.n)
        return self.g.value(self.F.value(x))

    def psi_value_many(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        return self.g.value_many(self.F.value_many(X))


def eval_f(problem: CompositeProblem, x) -> ExtReal:
    """Objective value as an extended real."""
    return problem.f_value(x)
