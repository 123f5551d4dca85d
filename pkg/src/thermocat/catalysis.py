"""Catalytic elementary thermal operations on system-catalyst composites."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import least_squares

from . import lp
from .core import (
    ThermalContext,
    beta_order,
    format_order,
    free_energy_delta,
    gibbs_population,
    marginals,
    mutual_information,
    thermomajorises,
)
from .errors import DimensionMismatch, NotMember, PreconditionViolated
from .reach import (
    _transpositions,
    MixtureCertificate,
    ReachableSet,
    eto_extreme_points_monotonic,
    eto_extremes_bruteforce,
    membership,
    monotonic_order,
)
from .swaps import SwapSequence, TwoLevelProcess, apply, beta_swap

ALPHAS = (0.5, 1.0, 2.0)
EXACT_COMPOSITE_LIMIT = 9


@dataclass(frozen=True, eq=False)
class CompositeContext:
    """System and catalyst contexts with system-major flattening ``(s, c) -> s * d_C + c``."""

    system: ThermalContext
    catalyst: ThermalContext

    @classmethod
    def degenerate(cls, system: ThermalContext, d_c: int) -> "CompositeContext":
        return cls(system, ThermalContext(np.zeros(d_c)))

    @property
    def dims(self) -> tuple[int, int]:
        return (self.system.dim, self.catalyst.dim)

    @property
    def dim(self) -> int:
        return self.system.dim * self.catalyst.dim

    @property
    def energies(self) -> np.ndarray:
        return (self.system.energies[:, None] + self.catalyst.energies[None, :]).ravel()

    @property
    def ctx(self) -> ThermalContext:
        return ThermalContext(self.energies, require_sorted=False)

    def index(self, s: int, c: int) -> int:
        return s * self.catalyst.dim + c

    def split(self, i: int) -> tuple[int, int]:
        return divmod(i, self.catalyst.dim)

    @property
    def labels(self) -> list[str]:
        return [f"{s + 1}*{c + 1}" for s in range(self.system.dim) for c in range(self.catalyst.dim)]

    def embedding(self, c) -> np.ndarray:
        """Matrix ``K`` with ``K q = q (x) c``."""
        c = np.asarray(c, dtype=float).reshape(-1, 1)
        return np.kron(np.eye(self.system.dim), c)


@dataclass(frozen=True)
class CatalystSpec:
    dim: int
    distribution: tuple[float, ...]
    minimally_disturbing: bool = False


def tensor(p, c, cc: CompositeContext) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    c = np.asarray(c, dtype=float)
    if p.size != cc.system.dim or c.size != cc.catalyst.dim:
        raise DimensionMismatch(f"expected sizes {cc.dims}, got ({p.size}, {c.size})")
    return np.kron(p, c)


def composite_beta_order(x, cc: CompositeContext) -> tuple[tuple[int, ...], str]:
    """Beta-order of a composite state and its rendering with ``s*c`` labels."""
    order = beta_order(x, cc.ctx)
    return order, format_order(order, cc.labels)


def is_minimally_disturbing(source, c, cc: CompositeContext) -> bool:
    """Whether ``source (x) c`` has a beta-order monotonic in composite energy."""
    return monotonic_order(tensor(source, c, cc), cc.ctx) is not None


def optimal_qubit_catalyst_c1(p, ctx: ThermalContext) -> float:
    """Ground population of the qubit catalyst best suited to lowering ``p_1``.

    Only defined for three-level states whose beta-order is (2, 1, 3).
    """
    p = ctx.check(p)
    if ctx.dim != 3:
        raise DimensionMismatch("formula is for three-level systems")
    if beta_order(p, ctx) != (1, 0, 2):
        raise PreconditionViolated(f"beta-order {format_order(beta_order(p, ctx))} is not (2, 1, 3)")
    p1, p3 = p[0], p[2]
    d13 = ctx.delta(0, 2)
    if p3 == 0:
        return 0.0
    return float((-p3 + math.sqrt(p3 * p3 + 8 * d13 * p1 * p3)) / (4 * d13 * p1))


# ---------------------------------------------------------------- sequence libraries


@dataclass(eq=False)
class SequenceLibrary:
    """Swap sequences with their (state independent) stochastic matrices.

    Reapplying sequences found for one catalyst to another gives states
    that are reachable but not necessarily all the extreme ones.
    """

    matrices: np.ndarray
    sequences: list[SwapSequence]

    @classmethod
    def from_sets(cls, sets: Sequence[ReachableSet]) -> "SequenceLibrary":
        seen: dict[bytes, int] = {}
        mats, seqs = [], []
        for rset in sets:
            for i in range(len(rset)):
                seq = rset.sequence(i)
                if seq is None:
                    continue
                m = seq.matrix(rset.ctx.dim)
                key = np.round(m, 12).tobytes()
                if key not in seen:
                    seen[key] = len(mats)
                    mats.append(m)
                    seqs.append(seq)
        return cls(np.asarray(mats), seqs)

    @classmethod
    def from_anchors(cls, p, cc: CompositeContext, anchors: Sequence[Sequence[float]], **kw) -> "SequenceLibrary":
        kw.setdefault("reduce", False)
        sets = [eto_extremes_bruteforce(tensor(p, c, cc), cc.ctx, **kw) for c in anchors]
        return cls.from_sets(sets)

    def __len__(self):
        return len(self.sequences)

    def vertices(self, x) -> tuple[np.ndarray, list[SwapSequence]]:
        states = self.matrices @ np.asarray(x, dtype=float)
        keep = lp.dedup(states)
        return states[keep], [self.sequences[k] for k in keep]


def qubit_anchor_library(p, cc: CompositeContext, n_anchors: int = 19, **kw) -> SequenceLibrary:
    if cc.catalyst.dim != 2:
        raise DimensionMismatch("qubit catalyst expected")
    grid = np.linspace(0.05, 0.95, n_anchors)
    return SequenceLibrary.from_anchors(p, cc, [(a, 1 - a) for a in grid], **kw)


# ---------------------------------------------------------------- catalytic sets


@dataclass
class CatalyticOptimum:
    state: np.ndarray
    value: float
    certificate: MixtureCertificate


@dataclass(eq=False)
class CatalyticSet:
    """States ``q`` with ``q (x) c`` reachable from ``p (x) c``, held implicitly.

    Queries are LPs over mixture weights of the composite ETO vertices; the
    map ``q -> q (x) c`` is linear so no facet description is needed.
    """

    source: np.ndarray
    catalyst: np.ndarray
    cc: CompositeContext
    composite: ReachableSet
    exact: bool = True

    def _equalities(self):
        v = self.composite.vertices
        n = len(v)
        ds = self.cc.system.dim
        k = self.cc.embedding(self.catalyst)
        a_eq = np.zeros((self.cc.dim + 1, n + ds))
        a_eq[:-1, :n] = v.T
        a_eq[:-1, n:] = -k
        a_eq[-1, :n] = 1.0
        b_eq = np.zeros(self.cc.dim + 1)
        b_eq[-1] = 1.0
        return a_eq, b_eq, n

    def membership(self, q, tol: float = lp.MEMBER_TOL) -> MixtureCertificate | None:
        q = np.asarray(q, dtype=float)
        if q.size != self.cc.system.dim:
            raise DimensionMismatch("query does not match the system dimension")
        return membership(self.composite, tensor(q, self.catalyst, self.cc), tol)

    def contains(self, q, tol: float = lp.MEMBER_TOL) -> bool:
        return self.membership(q, tol) is not None

    def optimise(self, objective, sense: str = "min", secondary=None, secondary_sense: str = "max") -> CatalyticOptimum:
        """Optimise a linear objective over the set, with an optional tie-break.

        The second stage optimises ``secondary`` while holding the primary
        objective within 1e-10 of its optimum.
        """
        a_eq, b_eq, n = self._equalities()
        w = np.asarray(objective, dtype=float)
        sign = 1.0 if sense == "min" else -1.0
        cost = np.concatenate([np.zeros(n), sign * w])
        res = lp._solve(cost, A_eq=a_eq, b_eq=b_eq, bounds=(0, None))
        if res.status != 0:
            raise lp.SolverFailure(f"catalytic LP failed: {res.message}")
        best = float(w @ res.x[n:])
        if secondary is not None:
            w2 = np.asarray(secondary, dtype=float)
            sign2 = 1.0 if secondary_sense == "min" else -1.0
            a_ub = np.concatenate([np.zeros(n), sign * w])[None, :]
            b_ub = np.array([sign * best + 1e-10])
            cost2 = np.concatenate([np.zeros(n), sign2 * w2])
            res2 = lp._solve(cost2, A_eq=a_eq, b_eq=b_eq, A_ub=a_ub, b_ub=b_ub, bounds=(0, None))
            if res2.status == 0:
                res = res2
        alpha = np.clip(res.x[:n], 0.0, None)
        alpha /= alpha.sum()
        q = np.clip(res.x[n:], 0.0, None)
        q /= q.sum()
        idx = np.nonzero(alpha > 1e-12)[0]
        resid = float(np.max(np.abs(self.composite.vertices.T @ alpha - tensor(q, self.catalyst, self.cc))))
        cert = MixtureCertificate(alpha[idx] / alpha[idx].sum(), idx, resid)
        return CatalyticOptimum(q, float(w @ q), cert)

    def min_level(self, level: int = 0) -> CatalyticOptimum:
        """Minimise one population; ties are broken by maximising the next level."""
        ds = self.cc.system.dim
        w = np.eye(ds)[level]
        nxt = np.eye(ds)[(level + 1) % ds]
        return self.optimise(w, "min", secondary=nxt, secondary_sense="max")


def ceto_set_fixed_catalyst(
    p,
    c,
    cc: CompositeContext,
    library: SequenceLibrary | None = None,
    **kw,
) -> CatalyticSet:
    """Catalytic ETO set of ``p`` for a fixed catalyst ``c``.

    Exact when the composite vertices come from standard formation (monotonic
    composite order) or a closed brute-force search; an inner approximation
    when a sequence library is supplied.
    """
    p = cc.system.check(p)
    c = cc.catalyst.check(c)
    x = tensor(p, c, cc)
    if library is not None:
        v, seqs = library.vertices(x)
        rset = ReachableSet(x, cc.ctx, "ETO", v, list(seqs), exact=False, reduced=False, note="sequence library")
        return CatalyticSet(p, c, cc, rset, exact=False)
    if monotonic_order(x, cc.ctx) is not None and cc.dim <= EXACT_COMPOSITE_LIMIT:
        rset = eto_extreme_points_monotonic(x, cc.ctx, reduce=cc.dim <= 6)
    else:
        kw.setdefault("reduce", False)
        rset = eto_extremes_bruteforce(x, cc.ctx, **kw)
    return CatalyticSet(p, c, cc, rset, exact=rset.exact)


@dataclass
class Ceto2Scan:
    grid: np.ndarray
    optima: np.ndarray
    values: np.ndarray
    exact: bool

    @property
    def argmin(self) -> float:
        """Smallest grid point whose value is within 1e-10 of the minimum."""
        hits = np.nonzero(self.values <= self.values.min() + 1e-10)[0]
        return float(self.grid[hits].min())


def ceto2_scan(p, ctx: ThermalContext, c1_grid=None, level: int = 0, library: SequenceLibrary | None = None) -> Ceto2Scan:
    """Minimise the population of ``level`` over qubit catalysts ``(c1, 1 - c1)``."""
    p = ctx.check(p)
    grid = np.linspace(0.0, 1.0, 1001) if c1_grid is None else np.asarray(c1_grid, dtype=float)
    cc = CompositeContext.degenerate(ctx, 2)
    optima, values = [], []
    for c1 in grid:
        cset = ceto_set_fixed_catalyst(p, (c1, 1 - c1), cc, library=library)
        opt = cset.min_level(level)
        optima.append(opt.state)
        values.append(opt.value)
    return Ceto2Scan(grid, np.asarray(optima), np.asarray(values), library is None)


def zoom_scan(
    p,
    ctx: ThermalContext,
    lo: float = 0.0,
    hi: float = 1.0,
    coarse: float = 1e-2,
    final: float = 1e-6,
    level: int = 0,
    library: SequenceLibrary | None = None,
    width: int = 10,
) -> tuple[float, list[Ceto2Scan]]:
    """Locate the best qubit catalyst on a ``final``-spaced grid by nested refinement.

    Each stage rescans ``width`` cells of the previous spacing on either side
    of the current best point at ten times finer spacing.
    """
    n = int(round((hi - lo) / coarse))
    scans = [ceto2_scan(p, ctx, np.linspace(lo, hi, n + 1), level, library)]
    best, step = scans[0].argmin, coarse
    while step > final * (1 + 1e-9):
        fine = step / 10
        k = int(round(step / fine)) * width // 10
        grid = best + fine * np.arange(-k, k + 1)
        grid = np.round(grid[(grid >= lo) & (grid <= hi)] / final) * final
        scans.append(ceto2_scan(p, ctx, grid, level, library))
        best, step = scans[-1].argmin, fine
    return best, scans


# ---------------------------------------------------------------- decomposition


def push_permutations(seq: SwapSequence, ctx: ThermalContext) -> tuple[list[TwoLevelProcess], tuple[int, ...]]:
    """Move exact transpositions of degenerate levels to the end of a sequence.

    Returns processes without such transpositions and the permutation ``P``
    such that the original sequence equals them followed by ``x -> x[P]``.
    """
    d = ctx.dim
    perm = list(range(d))
    core = []
    for proc in seq:
        if proc.lam == 1.0 and proc.delta == 1.0:
            a, b = proc.j, proc.k
            perm[a], perm[b] = perm[b], perm[a]
            continue
        core.append(TwoLevelProcess.make(perm[proc.j], perm[proc.k], proc.lam, ctx))
    return core, tuple(perm)


def _scs(a: list, b: list) -> list:
    """Shortest common supersequence of two lists."""
    n, m = len(a), len(b)
    dp = np.zeros((n + 1, m + 1), dtype=int)
    dp[:, 0] = np.arange(n + 1)
    dp[0, :] = np.arange(m + 1)
    for i in range(1, n + 1):
        for j in range(1, m + 1):
            if a[i - 1] == b[j - 1]:
                dp[i, j] = dp[i - 1, j - 1] + 1
            else:
                dp[i, j] = min(dp[i - 1, j], dp[i, j - 1]) + 1
    out = []
    i, j = n, m
    while i and j:
        if a[i - 1] == b[j - 1]:
            out.append(a[i - 1])
            i, j = i - 1, j - 1
        elif dp[i - 1, j] <= dp[i, j - 1]:
            out.append(a[i - 1])
            i -= 1
        else:
            out.append(b[j - 1])
            j -= 1
    out.extend(reversed(a[:i]))
    out.extend(reversed(b[:j]))
    return out[::-1]


def _is_subsequence(sub: list, sup: list) -> list[int] | None:
    pos, out = 0, []
    for item in sub:
        while pos < len(sup) and sup[pos] != item:
            pos += 1
        if pos == len(sup):
            return None
        out.append(pos)
        pos += 1
    return out


@dataclass
class Recombination:
    """A single sequence with partial processes standing in for a mixture."""

    sequence: SwapSequence
    optional: list[int]
    residual: float


def recombine(sequences: Sequence[SwapSequence], source, target, ctx: ThermalContext, tol: float = 1e-9) -> Recombination | None:
    """Merge beta-swap sequences into one sequence with free ``lambda`` entries.

    Swaps common to every sequence keep ``lambda = 1``; the others become
    partial processes whose parameters are fitted so the merged sequence
    maps ``source`` to ``target``.  The sequences are tried as given and then
    with degenerate transpositions pushed to the end.  Returns None when no
    merge reproduces ``target`` within ``tol``.
    """
    source = np.asarray(source, dtype=float)
    target = np.asarray(target, dtype=float)
    d = ctx.dim
    raw = [([p.pair for p in s], tuple(range(d))) for s in sequences]
    normalised = []
    for s in sequences:
        core, perm = push_permutations(s, ctx)
        normalised.append(([p.pair for p in core], perm))
    for variant in (raw, normalised):
        if len({perm for _, perm in variant}) != 1:
            continue
        out = _fit_merge([pl for pl, _ in variant], variant[0][1], source, target, ctx, tol)
        if out is not None and out.residual <= tol:
            return out
    return None


def _fit_merge(pair_lists, perm, source, target, ctx: ThermalContext, tol: float) -> Recombination | None:
    pair_lists = sorted(pair_lists, key=len, reverse=True)
    sup = pair_lists[0]
    for other in pair_lists[1:]:
        sup = _scs(sup, other)
    hits = np.zeros(len(sup), dtype=int)
    for pl in pair_lists:
        hits[_is_subsequence(pl, sup)] += 1
    optional = [i for i, h in enumerate(hits) if h < len(pair_lists)]

    def build(lams):
        procs = []
        lam_iter = iter(lams)
        for i, (a, b) in enumerate(sup):
            lam = next(lam_iter) if i in optional else 1.0
            procs.append(TwoLevelProcess.make(a, b, float(lam), ctx))
        for a, b in _transpositions(perm):
            procs.append(beta_swap(a, b, ctx))
        return SwapSequence(tuple(procs), ctx.dim)

    lams = []
    if optional:
        fit = least_squares(
            lambda lam: apply(build(lam), source) - target,
            x0=np.full(len(optional), 0.5),
            bounds=(0.0, 1.0),
            xtol=1e-15,
            ftol=1e-15,
            gtol=1e-15,
        )
        lams = fit.x
        # round near-endpoint parameters when the fit stays within tolerance
        snapped = np.where(lams > 1 - 1e-5, 1.0, np.where(lams < 1e-5, 0.0, lams))
        if np.max(np.abs(apply(build(snapped), source) - target)) <= tol:
            lams = snapped
    seq = build(lams)
    resid = float(np.max(np.abs(apply(seq, source) - target)))
    # drop processes that ended up as identities
    kept = [i for i, proc in enumerate(seq) if proc.lam > 0.0]
    optional = [kept.index(i) for i in optional if i in kept and seq[i].lam < 1.0]
    seq = SwapSequence(tuple(seq[i] for i in kept), ctx.dim)
    return Recombination(seq, optional, resid)


@dataclass
class Decomposition:
    certificate: MixtureCertificate
    sequences: list[SwapSequence]
    recombined: Recombination | None


def decompose_mixture(
    source,
    target,
    cc: CompositeContext,
    rset: ReachableSet | None = None,
    tol: float = lp.MEMBER_TOL,
) -> Decomposition:
    """Express a reachable composite state as a mixture of swap-sequence outputs.

    When the supporting sequences differ only by interleaved optional swaps,
    a single recombined sequence with partial processes is also returned.
    """
    ctx = cc.ctx
    source = ctx.check(source)
    target = np.asarray(target, dtype=float)
    if rset is None:
        rset = eto_extremes_bruteforce(source, ctx, reduce=False)
    cert = membership(rset, target, tol)
    if cert is None:
        raise NotMember("target is not in the reachable set")
    seqs = [rset.sequence(i) for i in cert.indices]
    recomb = None
    if all(s is not None for s in seqs):
        if len(seqs) == 1:
            recomb = Recombination(seqs[0], [], cert.residual)
        else:
            recomb = recombine(seqs, source, target, ctx, tol=max(tol, 10 * cert.residual))
    return Decomposition(cert, seqs, recomb)


# ---------------------------------------------------------------- trajectories


@dataclass
class TrajectoryStep:
    position: float
    label: str
    state: np.ndarray
    system: np.ndarray
    catalyst: np.ndarray
    free_energy: dict[str, dict[float, float]]
    mutual_information: float


@dataclass
class TrajectoryRecord:
    steps: list[TrajectoryStep]
    samples: list[TrajectoryStep] = field(default_factory=list)


def _step(x, cc: CompositeContext, position: float, label: str) -> TrajectoryStep:
    s, c = marginals(x, cc.dims)
    fe = {
        "system": {a: free_energy_delta(a, s, cc.system) for a in ALPHAS},
        "catalyst": {a: free_energy_delta(a, c, cc.catalyst) for a in ALPHAS},
        "total": {a: free_energy_delta(a, x, cc.ctx) for a in ALPHAS},
    }
    return TrajectoryStep(position, label, x, s, c, fe, mutual_information(x, cc.dims))


def trajectory_report(x, seq: SwapSequence, cc: CompositeContext, n_grid: int = 100) -> TrajectoryRecord:
    """Functionals after every process, plus samples inside each process.

    Inside process ``k`` with parameter ``lam`` the samples follow
    ``M_t`` for ``t`` on an ``n_grid``-point grid over ``[0, lam]``;
    ``position`` is ``k + t / lam``.
    """
    ctx = cc.ctx
    x = ctx.check(x)
    labels = cc.labels
    steps = [_step(x, cc, 0.0, "start")]
    samples = []
    for k, proc in enumerate(seq):
        for t in np.linspace(0.0, proc.lam, n_grid):
            part = TwoLevelProcess(proc.j, proc.k, float(t), proc.delta)
            frac = t / proc.lam if proc.lam > 0 else 1.0
            samples.append(_step(apply(part, x), cc, k + frac, proc.label(labels)))
        x = apply(proc, x)
        steps.append(_step(x, cc, float(k + 1), proc.label(labels)))
    return TrajectoryRecord(steps, samples)


# ---------------------------------------------------------------- cooling


@dataclass
class CatalystResult:
    catalyst: np.ndarray
    beta: float


@dataclass
class CoolingDimension:
    dim: int
    best: CatalystResult
    worst: CatalystResult
    tried: list[CatalystResult]
    exact: bool


@dataclass
class CoolingResult:
    beta_h: float
    beta: float
    beta_to: float
    beta_eto: float
    dims: dict[int, CoolingDimension]


def _bisect(pred: Callable[[float], bool], lo: float, hi: float, tol: float) -> float:
    """Largest value in ``[lo, hi]`` passing a monotone predicate, to ``tol``."""
    if pred(hi):
        return hi
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if pred(mid):
            lo = mid
        else:
            hi = mid
    return lo


def minimally_disturbing_catalysts(source, ctx: ThermalContext, d_c: int, resolution: int = 4) -> list[np.ndarray]:
    """Sorted catalysts whose product with ``source`` keeps a monotonic order.

    Log-population gaps are gridded between 0 and the largest ratio the
    source's order tolerates, so the grid always contains the uniform
    catalyst and the extreme ratio.
    """
    cc = CompositeContext.degenerate(ctx, d_c)
    g = np.sort(np.asarray(source) / ctx.gibbs)
    span = math.log(np.min(g[1:] / g[:-1])) if len(g) > 1 else 0.0
    span *= 1 - 1e-9
    out = []
    ticks = np.linspace(0.0, span, resolution + 1)
    for t in itertools.product(ticks, repeat=d_c - 1):
        if any(a < b for a, b in zip(t, t[1:])):
            continue
        logs = np.concatenate([t, [0.0]])
        c = np.exp(logs)
        c /= c.sum()
        if is_minimally_disturbing(source, c, cc):
            out.append(c)
    keep = lp.dedup(np.asarray(out))
    return [out[i] for i in keep]


def to_cooling_limit(source, ctx: ThermalContext, energies, beta: float, beta_max: float, tol: float) -> float:
    e = np.asarray(energies, dtype=float)
    return _bisect(lambda b: thermomajorises(source, gibbs_population(b * e), ctx), beta, beta_max, tol)


def cooling_scan(
    beta_h: float,
    beta: float,
    energies,
    catalyst_dims: Sequence[int] = (1, 2),
    mode: str = "auto",
    resolution: int = 4,
    tol: float = 1e-4,
    n_orders: int = 5000,
    seed: int = 0,
) -> CoolingResult:
    """Coldest Gibbs state reachable catalytically from a hotter Gibbs state.

    ``mode="exact"`` enumerates every target order of the standard
    formation (composite dimension at most 9); ``"heuristic"`` samples
    ``n_orders`` of them and so reports lower bounds; ``"auto"`` picks exact
    whenever allowed.
    """
    if not 0 < beta_h <= beta:
        raise PreconditionViolated("the source must be at least as hot as the environment")
    e = np.asarray(energies, dtype=float)
    ctx = ThermalContext.at(e, beta)
    src = gibbs_population(beta_h * e)
    beta_max = beta
    while thermomajorises(src, gibbs_population(2 * beta_max * e), ctx) and beta_max < 1e6:
        beta_max *= 2
    beta_max *= 2
    beta_to = to_cooling_limit(src, ctx, e, beta, beta_max, tol)
    rng = np.random.default_rng(seed)

    def limit(c) -> tuple[float, bool]:
        cc = CompositeContext.degenerate(ctx, len(c))
        x = tensor(src, c, cc)
        exact = mode == "exact" or (mode == "auto" and cc.dim <= EXACT_COMPOSITE_LIMIT)
        if mode == "exact" and cc.dim > EXACT_COMPOSITE_LIMIT:
            raise PreconditionViolated(f"exact mode supports composite dimension <= {EXACT_COMPOSITE_LIMIT}")
        if exact:
            rset = eto_extreme_points_monotonic(x, cc.ctx, reduce=False)
        else:
            targets = [tuple(rng.permutation(cc.dim)) for _ in range(n_orders)]
            rset = eto_extreme_points_monotonic(x, cc.ctx, targets=targets, reduce=False)

        def reachable(b):
            tgt = tensor(gibbs_population(b * e), c, cc)
            if not thermomajorises(x, tgt, cc.ctx):
                return False
            return membership(rset, tgt) is not None

        return _bisect(reachable, beta, beta_to, tol), exact

    beta_eto = limit(np.ones(1))[0]
    dims = {}
    for d_c in catalyst_dims:
        if d_c == 1:
            one = CatalystResult(np.ones(1), beta_eto)
            dims[1] = CoolingDimension(1, one, one, [one], True)
            continue
        tried, exact_all = [], True
        for c in minimally_disturbing_catalysts(src, ctx, d_c, resolution):
            b, exact = limit(c)
            exact_all &= exact
            tried.append(CatalystResult(c, b))
        best = max(tried, key=lambda r: r.beta)
        worst = min(tried, key=lambda r: r.beta)
        dims[d_c] = CoolingDimension(d_c, best, worst, tried, exact_all)
    return CoolingResult(beta_h, beta, beta_to, beta_eto, dims)
