"""Double description: converting between halfspace and generator forms.

The core routine enumerates the generators of a halfspace cone
{x : M x <= 0}.  Lineality (null(M)) is split off first and the pointed
remainder is built up row by row from a simplicial start, using the
standard combinatorial adjacency test.  Polytopes and unbounded
polyhedra go through the usual homogenization, and the reverse direction
(generators -> facets) is the same computation on the polar cone.

Scale: this is exact and fast for desk-size inputs (dimension <= ~10,
a few dozen rows); it makes no attempt beyond that.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

FEAS_TOL = 1e-9
_RANK_TOL = 1e-10


@dataclass
class VRep:
    """Generator form: conv(vertices) + cone(rays) + span(lines)."""

    vertices: np.ndarray  # (nv, d)
    rays: np.ndarray  # (nr, d), unit length
    lines: np.ndarray  # (nl, d), unit length, a basis of the lineality space

    @property
    def dim(self) -> int:
        return self.vertices.shape[1]

    @property
    def is_empty(self) -> bool:
        return self.vertices.shape[0] == 0

    def all_rays(self) -> np.ndarray:
        """Rays plus +-line pairs: a plain conic generating set."""
        if self.lines.shape[0] == 0:
            return self.rays
        return np.vstack([self.rays, self.lines, -self.lines])


def _null_space(M: np.ndarray, d: int) -> tuple[np.ndarray, np.ndarray]:
    """Orthonormal bases of null(M) and its complement."""
    if M.shape[0] == 0:
        return np.eye(d), np.zeros((d, 0))
    _, s, Vt = np.linalg.svd(M, full_matrices=True)
    rank = int(np.sum(s > _RANK_TOL * max(1.0, s[0] if s.size else 1.0)))
    null = Vt[rank:].T
    row = Vt[:rank].T
    return null, row


def _independent_rows(M: np.ndarray, k: int) -> list[int]:
    """Greedy selection of k linearly independent rows (by QR residual)."""
    chosen: list[int] = []
    basis = np.zeros((0, M.shape[1]))
    for i in range(M.shape[0]):
        cand = M[i]
        resid = cand - basis.T @ (basis @ cand) if basis.shape[0] else cand
        if np.linalg.norm(resid) > _RANK_TOL * max(1.0, np.linalg.norm(cand)):
            chosen.append(i)
            q = resid / np.linalg.norm(resid)
            basis = np.vstack([basis, q])
        if len(chosen) == k:
            return chosen
    raise ValueError("rows do not span the pointed subspace")  # pragma: no cover


def _pointed_cone_rays(M: np.ndarray) -> np.ndarray:
    """Extreme rays of the pointed cone {u : M u <= 0} (null(M) = 0)."""
    k_rows, d = M.shape
    if d == 0:
        return np.zeros((0, 0))
    sel = _independent_rows(M, d)
    Msel = M[sel]
    gens = -np.linalg.inv(Msel).T.copy()  # columns -> rows of generators
    gens = np.ascontiguousarray(gens)
    norms = np.linalg.norm(gens, axis=1)
    gens = gens / norms[:, None]
    # active masks over all rows, maintained incrementally over processed rows
    processed = list(sel)
    active = np.abs(gens @ M[processed].T) <= FEAS_TOL  # (ngen, nproc)

    for i in range(k_rows):
        if i in sel:
            continue
        m = M[i]
        s = gens @ m
        keep = s <= FEAS_TOL
        pos = np.where(s > FEAS_TOL)[0]
        neg = np.where(s < -FEAS_TOL)[0]
        new_rows = []
        new_active = []
        if pos.size and neg.size:
            for p in pos:
                for q in neg:
                    common = active[p] & active[q]
                    # adjacency: no third generator active on all common rows
                    adjacent = True
                    for r in range(gens.shape[0]):
                        if r != p and r != q and np.all(active[r][common]):
                            adjacent = False
                            break
                    if not adjacent:
                        continue
                    g = s[p] * gens[q] - s[q] * gens[p]
                    nrm = np.linalg.norm(g)
                    if nrm < 1e-12:
                        continue
                    g /= nrm
                    new_rows.append(g)
                    new_active.append(np.append(common, True))
        active = np.hstack([active, (np.abs(s) <= FEAS_TOL)[:, None]])
        parts_g = [gens[keep]]
        parts_a = [active[keep]]
        if new_rows:
            parts_g.append(np.array(new_rows))
            parts_a.append(np.array(new_active))
        gens = np.vstack(parts_g)
        active = np.vstack(parts_a)
        processed.append(i)
        if gens.shape[0] == 0:
            break
    return gens


def cone_generators(M: np.ndarray, dim: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Generators of {x in R^d : M x <= 0}.

    Returns (rays, lines): unit extreme rays of the pointed part and an
    orthonormal basis of the lineality space.  rays + lines together
    generate the cone (each line contributing both signs).
    """
    M = np.asarray(M, dtype=float)
    if M.ndim != 2:
        M = M.reshape(-1, dim if dim is not None else M.shape[-1])
    d = M.shape[1] if M.shape[1] else (dim or 0)
    nontrivial = [i for i in range(M.shape[0]) if np.linalg.norm(M[i]) > _RANK_TOL]
    M = M[nontrivial]
    lines, _ = _null_space(M, d)
    if M.shape[0] == 0:
        return np.zeros((0, d)), lines.T
    perp_dim = d - lines.shape[1]
    if perp_dim == 0:
        return np.zeros((0, d)), lines.T
    # orthonormal basis of the complement of the lineality space
    _, _, Vt = np.linalg.svd(M, full_matrices=True)
    B = Vt[:perp_dim].T  # (d, perp_dim)
    Mp = M @ B
    rays_p = _pointed_cone_rays(Mp)
    rays = rays_p @ B.T if rays_p.shape[0] else np.zeros((0, d))
    # re-verify against the inequalities
    if rays.shape[0]:
        viol = (rays @ M.T).max(initial=-np.inf)
        if viol > 10 * FEAS_TOL:
            raise RuntimeError(f"generator verification failed ({viol:.2e})")
    return rays, lines.T


def vertex_enumerate(A: np.ndarray, b: np.ndarray, eq_mask: np.ndarray | None = None) -> VRep:
    """Vertices/rays/lines of {x : A x <= b (rows), = on eq_mask rows}.

    Every vertex and ray is re-verified against the inequalities within
    FEAS_TOL before being returned.  An empty VRep means the polyhedron
    is empty.
    """
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float).reshape(-1)
    if A.ndim != 2:
        raise ValueError("A must be a matrix")
    k, d = A.shape
    if eq_mask is None:
        eq_mask = np.zeros(k, dtype=bool)
    rows = [np.hstack([A, -b[:, None]])]
    if np.any(eq_mask):
        rows.append(np.hstack([-A[eq_mask], b[eq_mask, None]]))
    rows.append(np.hstack([np.zeros((1, d)), -np.ones((1, 1))]))  # t >= 0
    M = np.vstack(rows)
    rays_h, lines_h = cone_generators(M, d + 1)

    verts = []
    rays = []
    lines = []
    for g in rays_h:
        t = g[-1]
        if t > FEAS_TOL:
            verts.append(g[:-1] / t)
        elif abs(t) <= FEAS_TOL:
            rays.append(g[:-1])
    for g in lines_h:
        # lineality of the homogenization always has t = 0
        v = g[:-1]
        if np.linalg.norm(v) > FEAS_TOL:
            lines.append(v)
    V = np.array(verts).reshape(-1, d)
    R = np.array(rays).reshape(-1, d)
    L = np.array(lines).reshape(-1, d)

    ub = ~eq_mask
    def _chk_point(v):
        return (
            (A[ub] @ v - b[ub]).max(initial=-np.inf) <= 1e-7
            and np.abs(A[eq_mask] @ v - b[eq_mask]).max(initial=0.0) <= 1e-7
        )

    def _chk_dir(r):
        return (
            (A[ub] @ r).max(initial=-np.inf) <= 1e-7
            and np.abs(A[eq_mask] @ r).max(initial=0.0) <= 1e-7
        )

    if V.shape[0] and not all(_chk_point(v) for v in V):
        raise RuntimeError("vertex verification failed")
    if R.shape[0] and not all(_chk_dir(r) for r in R):
        raise RuntimeError("ray verification failed")
    if L.shape[0] and not all(_chk_dir(l) and _chk_dir(-l) for l in L):
        raise RuntimeError("line verification failed")
    return VRep(vertices=V, rays=R, lines=L)


def hrep_from_generators(
    V: np.ndarray, R: np.ndarray | None = None, L: np.ndarray | None = None
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Facet form (A, b, eq_mask) of conv(V) + cone(R) + span(L).

    Computed by running the generator enumeration on the polar of the
    homogenization cone; lines of the polar become equality rows.
    """
    V = np.asarray(V, dtype=float)
    if V.ndim != 2:
        raise ValueError("V must be (nv, d)")
    nv, d = V.shape
    if nv == 0:
        raise ValueError("need at least one point")
    R = np.zeros((0, d)) if R is None else np.asarray(R, dtype=float).reshape(-1, d)
    L = np.zeros((0, d)) if L is None else np.asarray(L, dtype=float).reshape(-1, d)

    G = np.vstack(
        [
            np.hstack([V, np.ones((nv, 1))]),
            np.hstack([R, np.zeros((R.shape[0], 1))]),
            np.hstack([L, np.zeros((L.shape[0], 1))]),
            np.hstack([-L, np.zeros((L.shape[0], 1))]),
        ]
    )
    # polar cone {h : G h <= 0}; its generators are the facet normals
    normals, polar_lines = cone_generators(G, d + 1)

    rows_A: list[np.ndarray] = []
    rows_b: list[float] = []
    eq_flags: list[bool] = []
    for h in normals:
        a, a0 = h[:-1], h[-1]
        if np.linalg.norm(a) <= 1e-10:
            continue  # the trivial 0'x <= const facet from homogenization
        rows_A.append(a)
        rows_b.append(-a0)
        eq_flags.append(False)
    for h in polar_lines:
        a, a0 = h[:-1], h[-1]
        if np.linalg.norm(a) <= 1e-10:
            continue
        rows_A.append(a)
        rows_b.append(-a0)
        eq_flags.append(True)
    if not rows_A:
        # whole space
        return np.zeros((0, d)), np.zeros(0), np.zeros(0, dtype=bool)
    A = np.array(rows_A)
    b = np.array(rows_b)
    eq = np.array(eq_flags)
    # normalize rows for stable downstream tolerancing
    nrm = np.linalg.norm(A, axis=1)
    A /= nrm[:, None]
    b /= nrm
    # re-verify every generator against the produced facets
    pts = V
    slack = A @ pts.T - b[:, None]
    if slack.max(initial=-np.inf) > 1e-7:
        raise RuntimeError("facet verification failed on vertices")
    if eq.any():
        if np.abs(slack[eq]).max(initial=0.0) > 1e-7:
            raise RuntimeError("equality facet verification failed")
    dirs = np.vstack([R, L, -L]) if (R.shape[0] or L.shape[0]) else np.zeros((0, d))
    if dirs.shape[0]:
        dslack = A @ dirs.T
        if dslack[~eq].max(initial=-np.inf) > 1e-7:
            raise RuntimeError("facet verification failed on rays")
        if eq.any() and np.abs(dslack[eq]).max(initial=0.0) > 1e-7:
            raise RuntimeError("equality facet verification failed on rays")
    return A, b, eq
