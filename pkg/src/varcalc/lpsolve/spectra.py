"""Minimum of a quadratic form over a cone face.

For a face that is a full linear subspace the minimum over the unit
sphere is an exact eigenvalue computation.  For a proper cone face the
subspace eigenvalue is only a lower bound; sampled nonnegative
combinations of the face generators give an upper bound, and the result
says which kind it is.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class FaceMinimum:
    lower: float  # certified lower bound on min over the face's unit vectors
    upper: float  # exact value at some face point (an upper bound)
    certified: bool  # lower == upper up to tolerance (exact minimum known)
    witness: np.ndarray  # unit face vector attaining `upper`

    @property
    def value(self) -> float:
        return min(self.lower, self.upper)


def _orthonormal(B: np.ndarray) -> np.ndarray:
    q, r = np.linalg.qr(B)
    keep = np.abs(np.diag(r)) > 1e-12
    return q[:, keep]


def min_quadratic_on_cone_face(
    Q: np.ndarray,
    basis: np.ndarray,
    generators: np.ndarray | None = None,
    samples: int = 128,
    seed: int = 0,
) -> FaceMinimum:
    """Bound min { w'Qw : w in face, |w| = 1 }.

    `basis` has the face's spanning directions as columns.  With
    `generators` omitted the face is taken to be the whole subspace and
    the answer is exact.  Otherwise `generators` rows generate the face
    as a cone and the answer is a certified-lower / sampled-upper pair.
    """
    Q = np.asarray(Q, dtype=float)
    Q = 0.5 * (Q + Q.T)
    B = _orthonormal(np.asarray(basis, dtype=float))
    if B.shape[1] == 0:
        raise ValueError("face has an empty span")
    Qp = B.T @ Q @ B
    evals, evecs = np.linalg.eigh(Qp)
    lam_min = float(evals[0])
    eigdir = B @ evecs[:, 0]
    eigdir /= np.linalg.norm(eigdir)

    if generators is None:
        return FaceMinimum(lower=lam_min, upper=lam_min, certified=True, witness=eigdir)

    G = np.asarray(generators, dtype=float).reshape(-1, B.shape[0])
    if G.shape[0] == 0:
        raise ValueError("a proper face needs at least one generator")

    cands = [g / np.linalg.norm(g) for g in G if np.linalg.norm(g) > 1e-12]
    if G.shape[0] > 1 and samples > 0:
        from scipy.stats import qmc

        halton = qmc.Halton(d=G.shape[0], scramble=True, seed=seed)
        for theta in halton.random(samples):
            w = theta @ G
            nw = np.linalg.norm(w)
            if nw > 1e-10:
                cands.append(w / nw)
    # the subspace eigenvector may happen to lie in the cone; use it if so
    for sgn in (1.0, -1.0):
        v = sgn * eigdir
        if _in_cone(v, G):
            cands.append(v)
    vals = np.array([float(w @ Q @ w) for w in cands])
    idx = int(np.argmin(vals))
    upper = float(vals[idx])
    certified = upper <= lam_min + 1e-10 * max(1.0, abs(lam_min))
    return FaceMinimum(lower=lam_min, upper=upper, certified=certified, witness=cands[idx])


def _in_cone(v: np.ndarray, G: np.ndarray) -> bool:
    """Least-squares membership screen for v in cone(G rows)."""
    theta, *_ = np.linalg.lstsq(G.T, v, rcond=None)
    if np.any(theta < -1e-9):
        return False
    return bool(np.linalg.norm(G.T @ theta - v) <= 1e-9 * max(1.0, np.linalg.norm(v)))
