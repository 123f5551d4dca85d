"""Reachable-state polytopes under TO, ETO and MTO, held by their vertices."""

from __future__ import annotations

import itertools
import os
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import lp
from .core import (
    BetaOrder,
    ThermalContext,
    _tie_groups,
    beta_order,
    format_order,
    is_monotonic_in_energy,
    is_valid_order,
    thermo_curve,
    thermomajorises,
)
from .errors import BudgetExceeded, DimensionMismatch, PreconditionViolated
from .swaps import (
    SwapSequence,
    TwoLevelProcess,
    apply,
    beta_swap,
    is_neighbouring,
    t_swap,
)

DEFAULT_BUDGET = 10**7
HULL_REDUCE_LIMIT = 6000


def default_budget() -> int:
    """Node cap for enumerations; ``THERMOCAT_BUDGET`` overrides the default."""
    raw = os.environ.get("THERMOCAT_BUDGET")
    return int(float(raw)) if raw else DEFAULT_BUDGET


@dataclass
class MixtureCertificate:
    weights: np.ndarray
    indices: np.ndarray
    residual: float

    def reconstruct(self, vertices) -> np.ndarray:
        return np.asarray(vertices)[self.indices].T @ self.weights


@dataclass(eq=False)
class ReachableSet:
    """Convex polytope of states reachable from ``source``, by vertices.

    ``provenance[i]`` is a :class:`SwapSequence` producing vertex ``i`` or a
    string tag describing how it was built.  ``exact`` is False when the
    vertex list is only known to lie inside the true set.
    """

    source: np.ndarray
    ctx: ThermalContext
    kind: str
    vertices: np.ndarray
    provenance: list = field(default_factory=list)
    exact: bool = True
    reduced: bool = True
    note: str = ""

    def __len__(self):
        return len(self.vertices)

    def sequence(self, i: int) -> SwapSequence | None:
        prov = self.provenance[i]
        if isinstance(prov, SwapSequence):
            return prov
        if isinstance(prov, tuple) and self.note.startswith("standard formation from "):
            start = tuple(int(x) for x in self.note.split("from ")[1].split(","))
            return standard_formation(start, prov, self.ctx)
        return None

    def describe(self, i: int, labels: Sequence[str] | None = None) -> str:
        seq = self.sequence(i)
        if seq is not None:
            return seq.notation(labels)
        prov = self.provenance[i]
        return prov if isinstance(prov, str) else str(prov)

    def contains(self, q, tol: float = lp.MEMBER_TOL) -> bool:
        return membership(self, q, tol) is not None

    def _reduce(self) -> "ReachableSet":
        if len(self.vertices) > HULL_REDUCE_LIMIT and self.ctx.dim > 6:
            keep = lp.dedup(self.vertices)
            self.reduced = False
        else:
            keep = lp.hull_reduce(self.vertices)
        self.vertices = self.vertices[keep]
        self.provenance = [self.provenance[i] for i in keep]
        self._sort()
        return self

    def _sort(self):
        # deterministic row order, independent of how the vertices were found
        order = np.lexsort(np.round(self.vertices, 12).T[::-1])
        self.vertices = self.vertices[order]
        self.provenance = [self.provenance[i] for i in order]


def membership(rset: ReachableSet, q, tol: float = lp.MEMBER_TOL) -> MixtureCertificate | None:
    """Convex weights over the vertices reproducing ``q``, or None if outside."""
    q = np.asarray(q, dtype=float)
    if q.size != rset.ctx.dim:
        raise DimensionMismatch(f"query has {q.size} levels, set has {rset.ctx.dim}")
    if np.any(q < -tol) or abs(q.sum() - 1) > tol:
        return None
    w, resid = lp.convex_weights(rset.vertices, q)
    if resid > tol:
        return None
    idx = np.nonzero(w > 1e-12)[0]
    w = w[idx] / w[idx].sum()
    return MixtureCertificate(w, idx, resid)


# ---------------------------------------------------------------- thermal operations


def tight_state(p, ctx: ThermalContext, order: Sequence[int]) -> np.ndarray:
    """The state with beta-order ``order`` whose elbows all lie on the curve of ``p``."""
    lp_curve = thermo_curve(p, ctx)
    order = list(order)
    x = np.concatenate([[0.0], np.cumsum(ctx.gibbs[order])])
    y = lp_curve(x)
    q = np.empty(ctx.dim)
    q[order] = np.diff(y)
    return q


def to_extreme_points(p, ctx: ThermalContext) -> ReachableSet:
    p = ctx.check(p)
    d = ctx.dim
    perms = np.array(list(itertools.permutations(range(d))), dtype=int)
    curve = thermo_curve(p, ctx)
    x = np.concatenate([np.zeros((len(perms), 1)), np.cumsum(ctx.gibbs[perms], axis=1)], axis=1)
    y = curve(x)
    q = np.empty((len(perms), d))
    np.put_along_axis(q, perms, np.diff(y, axis=1), axis=1)
    q = np.clip(q, 0.0, None)
    q /= q.sum(axis=1, keepdims=True)
    keep = lp.dedup(q)
    rset = ReachableSet(
        p, ctx, "TO", q[keep], [f"tight {format_order(perms[i])}" for i in keep]
    )
    rset._sort()
    return rset


def gibbs_stochastic_feasible(p, q, ctx: ThermalContext) -> bool:
    p, q = ctx.check(p), ctx.check(q)
    return lp.gibbs_stochastic_feasible(p, q, ctx.gibbs)


# ---------------------------------------------------------------- standard formation


def standard_formation_plan(pi: Sequence[int], pi_target: Sequence[int]):
    """Pairs of the standard formation in application order, plus orders.

    Returns ``(blocks, orders)``: ``blocks[j]`` lists the level pairs of the
    j-th block in the order they act, ``orders`` the beta-order before the
    first block and after each block.
    """
    cur = list(pi)
    target = list(pi_target)
    if sorted(cur) != sorted(target):
        raise ValueError("orders must be permutations of the same levels")
    blocks, orders = [], [tuple(cur)]
    for j in range(len(cur) - 1):
        m = cur.index(target[j])
        if m < j:
            raise AssertionError("standard formation invariant broken")
        if m == j:
            continue
        moving = cur[m]
        block = [(cur[i], moving) for i in range(m - 1, j - 1, -1)]
        cur = cur[:j] + [moving] + cur[j:m] + cur[m + 1:]
        blocks.append(block)
        orders.append(tuple(cur))
    return blocks, orders


def standard_formation(pi: Sequence[int], pi_target: Sequence[int], ctx: ThermalContext) -> SwapSequence:
    blocks, _ = standard_formation_plan(pi, pi_target)
    procs = [beta_swap(a, b, ctx) for block in blocks for a, b in block]
    return SwapSequence(tuple(procs), ctx.dim)


def monotonic_order(p, ctx: ThermalContext) -> BetaOrder | None:
    """A valid beta-order of ``p`` that is monotonic in energy, if one exists."""
    groups = _tie_groups(p, ctx)
    e = ctx.energies
    for sign in (1, -1):
        order = tuple(i for grp in groups for i in sorted(grp, key=lambda i: (sign * e[i], i)))
        if is_monotonic_in_energy(order, ctx):
            return order
    return None


def standard_formation_vertices(p, ctx: ThermalContext, start: Sequence[int]):
    """Apply the standard formation for every target order at once.

    Walks the prefix tree of target orders level by level so that shared
    leading blocks are applied once.  Returns ``(states, target_orders)``.
    """
    e = ctx.energies
    d = ctx.dim
    x = np.asarray(p, dtype=float)[None, :].copy()
    cur = np.asarray(start, dtype=int)[None, :].copy()
    for j in range(d - 1):
        xs, orders = [], []
        for t in range(d - j):
            xt = x.copy()
            ot = cur.copy()
            rows = np.arange(len(xt))
            for pos in range(j + t, j, -1):
                a, b = ot[:, pos - 1], ot[:, pos]
                lo = np.where(e[a] <= e[b], a, b)
                hi = np.where(e[a] <= e[b], b, a)
                dl = np.exp(-(e[hi] - e[lo]))
                pl, ph = xt[rows, lo], xt[rows, hi]
                xt[rows, lo] = (1 - dl) * pl + ph
                xt[rows, hi] = dl * pl
                ot[:, [pos - 1, pos]] = ot[:, [pos, pos - 1]]
            xs.append(xt)
            orders.append(ot)
        x = np.concatenate(xs)
        cur = np.concatenate(orders)
    return x, cur


def eto_extreme_points_monotonic(p, ctx: ThermalContext, targets=None, reduce: bool = True) -> ReachableSet:
    """ETO vertices of a state whose beta-order is monotonic in energy.

    With ``targets=None`` every target order is used, which gives the exact
    vertex set.  A list of target orders yields an inner approximation.
    """
    p = ctx.check(p)
    start = monotonic_order(p, ctx)
    if start is None:
        raise PreconditionViolated(f"beta-order {format_order(beta_order(p, ctx))} is not monotonic in energy")
    if targets is None:
        states, orders = standard_formation_vertices(p, ctx, start)
        exact = True
    else:
        orders = np.array([tuple(t) for t in targets], dtype=int)
        states = np.array([apply(standard_formation(start, t, ctx), p) for t in orders])
        exact = False
    states = np.clip(states, 0.0, None)
    states /= states.sum(axis=1, keepdims=True)
    keep = lp.dedup(states)
    rset = ReachableSet(
        p,
        ctx,
        "ETO",
        states[keep],
        [tuple(int(i) for i in orders[k]) for k in keep],
        exact=exact,
        note="standard formation from " + ",".join(str(i) for i in start),
    )
    if reduce:
        rset._reduce()
    else:
        rset.reduced = False
        rset._sort()
    return rset


# ---------------------------------------------------------------- brute force


def degenerate_blocks(ctx: ThermalContext, tol: float = 1e-12) -> list[list[int]]:
    order = np.argsort(ctx.energies, kind="stable")
    blocks = [[int(order[0])]]
    for prev, cur in zip(order, order[1:]):
        if abs(ctx.energies[cur] - ctx.energies[prev]) <= tol:
            blocks[-1].append(int(cur))
        else:
            blocks.append([int(cur)])
    return [sorted(b) for b in blocks]


def _transpositions(perm: Sequence[int]) -> list[tuple[int, int]]:
    """Position swaps turning ``v`` into ``v[perm]`` when applied in order."""
    cur = list(range(len(perm)))
    out = []
    for i, want in enumerate(perm):
        m = cur.index(want)
        if m != i:
            cur[i], cur[m] = cur[m], cur[i]
            out.append((i, m))
    return out


class _Search:
    """Breadth-first enumeration of beta-swap sequences with provenance."""

    def __init__(self, p, ctx: ThermalContext, procs, blocks, prune: bool, budget: int):
        self.ctx = ctx
        self.procs = procs
        self.blocks = [b for b in blocks if len(b) > 1]
        self.prune = prune
        self.budget = budget
        self.states: list[np.ndarray] = []
        self.parent: list[int] = []
        self.via: list[int] = []
        self.fixup: list[list[tuple[int, int]]] = []
        self.seen: dict[bytes, int] = {}
        self.best: dict[bytes, list] = {}
        self.nodes = 0
        x, perm = self.canonical(np.asarray(p, dtype=float)[None, :])
        self.root = self.add(x[0], -1, -1, _transpositions(perm[0]))

    def canonical(self, x: np.ndarray):
        """Sort populations within degenerate blocks, largest first."""
        perm = np.tile(np.arange(x.shape[1]), (len(x), 1))
        for b in self.blocks:
            b = np.asarray(b)
            srt = np.argsort(-x[:, b], axis=1, kind="stable")
            perm[:, b] = b[srt]
        return np.take_along_axis(x, perm, axis=1), perm

    def _key(self, x: np.ndarray) -> bytes:
        return (np.round(x, 11) + 0.0).tobytes()

    def _order(self, x: np.ndarray) -> np.ndarray:
        g = np.round(x / self.ctx.gibbs, 10)
        return np.lexsort((np.arange(x.size), -g))

    def add(self, x, parent, via, fixup) -> int:
        idx = len(self.states)
        self.states.append(x)
        self.parent.append(parent)
        self.via.append(via)
        self.fixup.append(fixup)
        self.seen[self._key(x)] = idx
        if self.prune:
            order = self._order(x)
            okey = order.tobytes()
            y = np.cumsum(x[order])
            entry = self.best.setdefault(okey, [[], [], order])
            if entry[1]:
                ys = np.asarray(entry[1])
                kept = ~np.all(y >= ys - 1e-13, axis=1)
                entry[0] = [i for i, k in zip(entry[0], kept) if k]
                entry[1] = [r for r, k in zip(entry[1], kept) if k]
            entry[0].append(idx)
            entry[1].append(y)
        return idx

    def dominated(self, x) -> bool:
        order = self._order(x)
        entry = self.best.get(order.tobytes())
        if not entry or not entry[1]:
            return False
        y = np.cumsum(x[order])
        return bool(np.any(np.all(np.asarray(entry[1]) >= y - 1e-12, axis=1)))

    def expand(self, frontier: list[int]) -> list[int]:
        if not frontier:
            return []
        x = np.asarray([self.states[i] for i in frontier])
        n = len(frontier)
        self.nodes += n * len(self.procs)
        if self.nodes > self.budget:
            raise BudgetExceeded(f"search visited more than {self.budget} nodes")
        batch = np.concatenate([apply(proc, x) for proc in self.procs])
        batch = np.clip(batch, 0.0, None)
        batch /= batch.sum(axis=1, keepdims=True)
        batch, perms = self.canonical(batch)
        new = []
        for r in range(len(batch)):
            y = batch[r]
            if self._key(y) in self.seen:
                continue
            if self.prune and self.dominated(y):
                continue
            k, src = divmod(r, n)
            new.append(self.add(y, frontier[src], k, _transpositions(perms[r])))
        return new

    def sequence(self, idx: int) -> list[TwoLevelProcess]:
        chain = []
        while idx != -1:
            chain.append(idx)
            idx = self.parent[idx]
        procs = []
        for i in reversed(chain):
            if self.via[i] >= 0:
                procs.append(self.procs[self.via[i]])
            procs.extend(beta_swap(a, b, self.ctx) for a, b in self.fixup[i])
        return procs

    def candidates(self) -> list[int]:
        if self.prune:
            return sorted(i for entry in self.best.values() for i in entry[0])
        return list(range(len(self.states)))


def eto_extremes_bruteforce(
    p,
    ctx: ThermalContext,
    l_max: int | None = None,
    budget: int | None = None,
    prune: bool | None = None,
    reduce: bool = True,
) -> ReachableSet:
    """ETO vertices by exhaustive enumeration of beta-swap sequences.

    ``l_max=None`` runs until no new state appears.  Pruning of states
    thermomajorised by a recorded state with the same beta-order is on by
    default only in that mode; with a length cap only exact duplicates are
    dropped, so the result is a plain enumeration of all sequences up to
    ``l_max`` swaps.  Populations inside a degenerate energy block are kept
    sorted (degenerate swaps are exact transpositions) and the final vertex
    list is closed under those permutations again.
    """
    p = ctx.check(p)
    budget = default_budget() if budget is None else budget
    if prune is None:
        prune = l_max is None
    d = ctx.dim
    blocks = degenerate_blocks(ctx)
    deg = {(a, b) for blk in blocks for a in blk for b in blk}
    procs = [beta_swap(j, k, ctx) for j in range(d) for k in range(j + 1, d) if (j, k) not in deg]
    search = _Search(p, ctx, procs, blocks, prune, budget)
    frontier = [search.root]
    depth = 0
    while frontier and (l_max is None or depth < l_max):
        frontier = search.expand(frontier)
        depth += 1

    cand = search.candidates()
    verts, prov = [], []
    big = [b for b in blocks if len(b) > 1]
    sym = list(itertools.product(*(itertools.permutations(b) for b in big)))
    for i in cand:
        base = search.sequence(i)
        x = search.states[i]
        for choice in sym:
            perm = np.arange(d)
            for b, pb in zip(big, choice):
                perm[b] = pb
            fix = [beta_swap(a, b, ctx) for a, b in _transpositions(perm)]
            verts.append(x[perm])
            prov.append(SwapSequence(tuple(base + fix), d))
    rset = ReachableSet(
        p,
        ctx,
        "ETO",
        np.asarray(verts),
        prov,
        note=f"brute force, depth {depth}, {search.nodes} nodes"
        + ("" if frontier else ", closed"),
    )
    rset.exact = not frontier or l_max is None
    if reduce:
        rset._reduce()
    else:
        keep = lp.dedup(rset.vertices)
        rset.vertices = rset.vertices[keep]
        rset.provenance = [rset.provenance[k] for k in keep]
        rset.reduced = False
        rset._sort()
    return rset


def eto_extreme_points(p, ctx: ThermalContext, **kw) -> ReachableSet:
    """Standard formation for monotonic sources, brute force otherwise."""
    p = ctx.check(p)
    if monotonic_order(p, ctx) is not None:
        return eto_extreme_points_monotonic(p, ctx)
    return eto_extremes_bruteforce(p, ctx, **kw)


# ---------------------------------------------------------------- Markovian


def coarse_grainings(r, ctx: ThermalContext) -> list[tuple[np.ndarray, tuple[int, ...]]]:
    """States obtained by flattening the curve of ``r`` between kept elbows."""
    curve = thermo_curve(r, ctx)
    d = ctx.dim
    out = []
    for mask in itertools.product((False, True), repeat=d - 1):
        kept = [0] + [l + 1 for l in range(d - 1) if mask[l]] + [d]
        y = np.interp(curve.x, curve.x[kept], curve.y[kept])
        q = np.empty(d)
        q[list(curve.order)] = np.diff(y)
        out.append((q, tuple(kept[1:-1])))
    return out


def mto_extreme_candidates(p, ctx: ThermalContext, budget: int | None = None) -> ReachableSet:
    """Hull-reduced candidates for the vertices of the MTO reachable set.

    Endpoints of all repetition-free sequences of neighbouring T-swaps,
    together with the coarse-grainings of each endpoint (same-order states
    below its curve with elbows on it).
    """
    p = ctx.check(p)
    budget = default_budget() if budget is None else budget
    d = ctx.dim
    pairs = [(j, k) for j in range(d) for k in range(j + 1, d)]
    ends: list[tuple[np.ndarray, SwapSequence]] = []
    stack = [(p, SwapSequence((), d), frozenset())]
    nodes = 0
    while stack:
        x, seq, used = stack.pop()
        ends.append((x, seq))
        for j, k in pairs:
            if (j, k) in used:
                continue
            proc = t_swap(j, k, ctx)
            if not is_neighbouring(proc, x, ctx):
                continue
            nodes += 1
            if nodes > budget:
                raise BudgetExceeded(f"MTO enumeration exceeded {budget} nodes")
            stack.append((apply(proc, x), seq.then(proc), used | {(j, k)}))
    verts, prov = [], []
    for x, seq in ends:
        for q, kept in coarse_grainings(x, ctx):
            verts.append(q)
            if len(kept) == d - 1:
                prov.append(seq)
            else:
                prov.append(f"coarse-grained [{seq.notation()}] keeping elbows {[k for k in kept]}")
    rset = ReachableSet(p, ctx, "MTO", np.asarray(verts), prov, note="candidates, hull-reduced")
    return rset._reduce()


# ---------------------------------------------------------------- partial level thermalisation


def shared_order(p, q, ctx: ThermalContext) -> BetaOrder | None:
    gp = {i: n for n, grp in enumerate(_tie_groups(p, ctx)) for i in grp}
    gq = {i: n for n, grp in enumerate(_tie_groups(q, ctx)) for i in grp}
    order = tuple(sorted(range(ctx.dim), key=lambda i: (gp[i], gq[i], i)))
    if is_valid_order(order, p, ctx) and is_valid_order(order, q, ctx):
        return order
    return None


def plt_sequence(p, q, ctx: ThermalContext, tol: float = 1e-12, max_steps: int = 100000) -> SwapSequence:
    """Partial level thermalisations between consecutive levels taking ``p`` to ``q``.

    Elbows are lowered one at a time, sweeping in increasing x, each as far
    as the target or the chord through its neighbours allows.
    """
    p, q = ctx.check(p), ctx.check(q)
    order = shared_order(p, q, ctx)
    if order is None:
        raise PreconditionViolated("p and q share no beta-order")
    if not thermomajorises(p, q, ctx):
        raise PreconditionViolated("p does not thermomajorise q")
    d = ctx.dim
    g = ctx.gibbs[list(order)]
    xs = np.concatenate([[0.0], np.cumsum(g)])
    y = np.concatenate([[0.0], np.cumsum(p[list(order)])])
    target = np.concatenate([[0.0], np.cumsum(q[list(order)])])
    procs = []
    x = p.copy()
    for _ in range(max_steps):
        moved = False
        for l in range(1, d):
            if y[l] - target[l] <= tol:
                continue
            chord = y[l - 1] + (y[l + 1] - y[l - 1]) * (xs[l] - xs[l - 1]) / (xs[l + 1] - xs[l - 1])
            new = max(target[l], chord)
            if y[l] - new <= tol:
                continue
            a, b = order[l - 1], order[l]
            drop = y[l] - new
            e = ctx.energies
            dl = ctx.delta(a, b)
            if (e[a], a) <= (e[b], b):
                lam = drop / (dl * x[a] - x[b])
            else:
                lam = drop / (x[a] - dl * x[b])
            proc = TwoLevelProcess.make(a, b, min(max(lam, 0.0), 1.0), ctx)
            x = apply(proc, x)
            procs.append(proc)
            moved = True
            y = np.concatenate([[0.0], np.cumsum(x[list(order)])])
        if not moved:
            break
    if np.max(np.abs(x - q)) > 1e-9:
        raise PreconditionViolated("partial thermalisation schedule did not converge")
    return SwapSequence(tuple(procs), d)
