"""Small linear programs over vertex sets, solved with HiGHS through scipy."""

from __future__ import annotations

import numpy as np
from scipy.optimize import linprog
from scipy.spatial import ConvexHull, QhullError

from .errors import SolverFailure

MEMBER_TOL = 1e-9
DEDUP_DECIMALS = 9

_HIGHS = {"primal_feasibility_tolerance": 1e-10, "dual_feasibility_tolerance": 1e-10}


def _solve(c, **kw):
    res = linprog(c, method="highs", options=_HIGHS, **kw)
    if res.status not in (0, 2):
        raise SolverFailure(f"LP failed: {res.message}")
    return res


def convex_weights(vertices, q) -> tuple[np.ndarray, float]:
    """Weights ``a >= 0, sum(a) = 1`` minimising ``|V^T a - q|_1``.

    Returns the weights and the infinity-norm reconstruction error.
    """
    v = np.asarray(vertices, dtype=float)
    q = np.asarray(q, dtype=float)
    n, d = v.shape
    # variables: a (n), s+ (d), s- (d)
    c = np.concatenate([np.zeros(n), np.ones(2 * d)])
    a_eq = np.zeros((d + 1, n + 2 * d))
    a_eq[:d, :n] = v.T
    a_eq[:d, n:n + d] = np.eye(d)
    a_eq[:d, n + d:] = -np.eye(d)
    a_eq[d, :n] = 1.0
    b_eq = np.concatenate([q, [1.0]])
    res = _solve(c, A_eq=a_eq, b_eq=b_eq, bounds=(0, None))
    if res.status != 0:
        raise SolverFailure(f"membership LP failed: {res.message}")
    w = np.clip(res.x[:n], 0.0, None)
    w /= w.sum()
    return w, float(np.max(np.abs(v.T @ w - q)))


def in_hull(vertices, q, tol: float = MEMBER_TOL) -> bool:
    return convex_weights(vertices, q)[1] <= tol


def dedup(vertices, decimals: int = DEDUP_DECIMALS) -> np.ndarray:
    """Indices of the first occurrence of each distinct row (rounded)."""
    v = np.asarray(vertices, dtype=float)
    if len(v) == 0:
        return np.zeros(0, dtype=int)
    _, first = np.unique(np.round(v, decimals) + 0.0, axis=0, return_index=True)
    return np.sort(first)


def _affine_coords(v: np.ndarray) -> np.ndarray:
    centred = v - v.mean(axis=0)
    _, s, vt = np.linalg.svd(centred, full_matrices=False)
    rank = int(np.sum(s > 1e-10 * max(1.0, s[0])))
    return centred @ vt[:rank].T


def _on_simplicial_facets(coords, hull, rows, tol: float = 1e-10) -> np.ndarray:
    """Flags for points ``coords[rows]`` lying inside some triangulated facet."""
    pts = coords[rows]
    covered = np.zeros(len(rows), dtype=bool)
    dist = pts @ hull.equations[:, :-1].T + hull.equations[:, -1]
    for f, simplex in enumerate(hull.simplices):
        on = np.nonzero(~covered & (np.abs(dist[:, f]) <= tol))[0]
        if not len(on):
            continue
        a = np.vstack([coords[simplex].T, np.ones(len(simplex))])
        b = np.vstack([pts[on].T, np.ones(len(on))])
        lam, *_ = np.linalg.lstsq(a, b, rcond=None)
        ok = np.all(lam >= -tol, axis=0) & np.all(np.abs(a @ lam - b) <= tol, axis=0)
        covered[on[ok]] = True
    return covered


def hull_reduce(vertices, tol: float = MEMBER_TOL) -> np.ndarray:
    """Indices of the extreme points among ``vertices`` (duplicates merged).

    Qhull proposes candidates when the point cloud is full-dimensional in its
    affine hull; every survivor is then confirmed by an LP.
    """
    v = np.asarray(vertices, dtype=float)
    keep = dedup(v)
    if len(keep) <= 2:
        return keep
    cand = keep
    neighbours = None
    coords = _affine_coords(v[keep])
    if 2 <= coords.shape[1] and len(keep) > coords.shape[1] + 1:
        try:
            hull = ConvexHull(coords)
        except QhullError:
            hull = None
        if hull is not None:
            cand = keep[np.sort(hull.vertices)]
            # qhull may drop points lying on a facet within its own precision;
            # those near the boundary get an exact check
            slack = (coords @ hull.equations[:, :-1].T + hull.equations[:, -1]).max(axis=1)
            local = {k: n for n, k in enumerate(keep)}
            dropped = np.setdiff1d(keep, cand)
            near = np.asarray([i for i in dropped if slack[local[i]] > -1e-7], dtype=int)
            if len(near):
                covered = _on_simplicial_facets(coords, hull, np.asarray([local[i] for i in near]))
                near = near[~covered]
            outside = [i for i in near if not in_hull(v[cand], v[i], tol)]
            cand = np.sort(np.concatenate([cand, np.asarray(outside, dtype=int)]))
            if not outside:
                neighbours = {int(keep[n]): set() for n in hull.vertices}
                for simplex in hull.simplices:
                    for a in simplex:
                        neighbours[int(keep[a])].update(int(keep[b]) for b in simplex if b != a)
    out = list(cand)
    for i in list(cand):
        if neighbours is not None:
            # a spurious qhull vertex lies on a face spanned by its
            # triangulation neighbours, so a small LP suffices
            others = sorted(j for j in neighbours[int(i)] if j in set(out))
        else:
            others = [j for j in out if j != i]
        if len(others) and in_hull(v[others], v[i], tol):
            out.remove(i)
    return np.asarray(out, dtype=int)


def gibbs_stochastic_feasible(p, q, gibbs, tol: float = MEMBER_TOL) -> bool:
    """Whether some Gibbs-stochastic matrix maps ``p`` to ``q``."""
    p, q, g = (np.asarray(x, dtype=float) for x in (p, q, gibbs))
    d = p.size
    # M flattened row-major: M[i, j] -> i * d + j; constraints
    # columns sum to 1, M g = g, M p = q; minimise the L1 slack on M p = q
    n = d * d
    rows = []
    rhs = []
    for j in range(d):
        r = np.zeros(n)
        r[j::d] = 1.0
        rows.append(r)
        rhs.append(1.0)
    for i in range(d):
        r = np.zeros(n)
        r[i * d:(i + 1) * d] = g
        rows.append(r)
        rhs.append(g[i])
    a_fixed = np.array(rows)
    a_map = np.zeros((d, n))
    for i in range(d):
        a_map[i, i * d:(i + 1) * d] = p
    a_eq = np.block([
        [a_fixed, np.zeros((2 * d, 2 * d))],
        [a_map, np.eye(d), -np.eye(d)],
    ])
    b_eq = np.concatenate([rhs, q])
    c = np.concatenate([np.zeros(n), np.ones(2 * d)])
    res = _solve(c, A_eq=a_eq, b_eq=b_eq, bounds=(0, None))
    if res.status != 0:
        raise SolverFailure(f"Gibbs-stochastic LP failed: {res.message}")
    m = res.x[:n].reshape(d, d)
    return float(np.max(np.abs(m @ p - q))) <= tol
