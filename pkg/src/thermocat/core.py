"""Thermal contexts, population vectors, beta-orders and thermomajorisation curves.

Energies are stored in units of 1/beta, so the inverse temperature inside a
:class:`ThermalContext` is always 1.  Orders are tuples of 0-based level
indices listing levels from the largest ratio ``p_i / gamma_i`` to the
smallest.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DimensionMismatch, PreconditionViolated

SUM_TOL = 1e-12
RATIO_TOL = 1e-9
CURVE_TOL = 1e-12
TIGHT_TOL = 1e-10

BetaOrder = tuple  # tuple[int, ...], 0-based level indices


def population(values, dim: int | None = None) -> np.ndarray:
    """Validate a probability vector and return it as a float array.

    Inputs within 1e-9 of unit sum are renormalised so the stored vector sums
    to one within 1e-12.
    """
    p = np.asarray(values, dtype=float).reshape(-1)
    if dim is not None and p.size != dim:
        raise DimensionMismatch(f"expected {dim} entries, got {p.size}")
    if not np.all(np.isfinite(p)):
        raise ValueError("population entries must be finite")
    if np.any(p < -1e-12):
        raise ValueError(f"population has negative entries: {p}")
    total = p.sum()
    if abs(total - 1.0) > 1e-9:
        raise ValueError(f"population sums to {total!r}, not 1")
    p = np.clip(p, 0.0, None)
    return p / p.sum()


def gibbs_population(energies: Sequence[float]) -> np.ndarray:
    """Boltzmann weights ``exp(-E_i) / Z`` for dimensionless energies."""
    e = np.asarray(energies, dtype=float)
    w = np.exp(-(e - e.min()))
    return w / w.sum()


@dataclass(frozen=True, eq=False)
class ThermalContext:
    """Energy levels (in units of 1/beta) and the induced Gibbs state.

    Use :meth:`at` to build a context from physical energies and an inverse
    temperature; the product ``beta * E`` is what gets stored.
    """

    energies: np.ndarray
    require_sorted: bool = field(default=True, repr=False)

    def __post_init__(self):
        e = np.asarray(self.energies, dtype=float).reshape(-1)
        if e.size == 0 or not np.all(np.isfinite(e)):
            raise ValueError("energies must be a non-empty finite list")
        if self.require_sorted and np.any(np.diff(e) < 0):
            raise ValueError("energies must be sorted non-decreasing")
        e.setflags(write=False)
        object.__setattr__(self, "energies", e)
        g = gibbs_population(e)
        g.setflags(write=False)
        object.__setattr__(self, "_gibbs", g)

    @classmethod
    def at(cls, energies: Sequence[float], beta: float = 1.0) -> "ThermalContext":
        if not beta > 0:
            raise ValueError("beta must be positive")
        return cls(beta * np.asarray(energies, dtype=float))

    @property
    def beta(self) -> float:
        return 1.0

    @property
    def dim(self) -> int:
        return self.energies.size

    @property
    def gibbs(self) -> np.ndarray:
        return self._gibbs

    @property
    def partition_sum(self) -> float:
        return float(np.exp(-self.energies).sum())

    def delta(self, j: int, k: int) -> float:
        """``gamma_k / gamma_j`` for ``E_j <= E_k``; always in (0, 1]."""
        lo, hi = sorted((self.energies[j], self.energies[k]))
        return math.exp(-(hi - lo))

    def check(self, p) -> np.ndarray:
        return population(p, self.dim)


def element_ratios(p, ctx: ThermalContext) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if p.size != ctx.dim:
        raise DimensionMismatch(f"state has {p.size} levels, context has {ctx.dim}")
    return p / ctx.gibbs


def _tied(a: float, b: float) -> bool:
    return abs(a - b) <= RATIO_TOL * max(abs(a), abs(b)) + 1e-15


def _tie_groups(p, ctx: ThermalContext) -> list[list[int]]:
    """Levels grouped by (near-)equal ratio, groups in non-increasing ratio order."""
    g = element_ratios(p, ctx)
    idx = sorted(range(ctx.dim), key=lambda i: (-g[i], i))
    groups = [[idx[0]]]
    for prev, cur in zip(idx, idx[1:]):
        if _tied(g[prev], g[cur]):
            groups[-1].append(cur)
        else:
            groups.append([cur])
    return [sorted(grp) for grp in groups]


def beta_order(p, ctx: ThermalContext) -> BetaOrder:
    """Canonical beta-order: non-increasing ratios, ties broken by lower index."""
    return tuple(i for grp in _tie_groups(p, ctx) for i in grp)


def all_beta_orders(p, ctx: ThermalContext) -> list[BetaOrder]:
    groups = _tie_groups(p, ctx)
    out = []
    for parts in itertools.product(*(itertools.permutations(grp) for grp in groups)):
        out.append(tuple(i for part in parts for i in part))
    return out


def is_valid_order(order: Sequence[int], p, ctx: ThermalContext) -> bool:
    g = element_ratios(p, ctx)
    seq = [g[i] for i in order]
    return all(a >= b or _tied(a, b) for a, b in zip(seq, seq[1:]))


def is_monotonic_in_energy(order: Sequence[int], ctx: ThermalContext) -> bool:
    e = ctx.energies[list(order)]
    d = np.diff(e)
    return bool(np.all(d >= 0) or np.all(d <= 0))


def format_order(order: Sequence[int], labels: Sequence[str] | None = None) -> str:
    if labels is None:
        return "(" + ", ".join(str(i + 1) for i in order) + ")"
    return "(" + ", ".join(labels[i] for i in order) + ")"


@dataclass(frozen=True, eq=False)
class ThermoCurve:
    """Concave piecewise-linear curve through ``elbows`` (first row is the origin)."""

    elbows: np.ndarray
    order: BetaOrder = ()

    @property
    def x(self) -> np.ndarray:
        return self.elbows[:, 0]

    @property
    def y(self) -> np.ndarray:
        return self.elbows[:, 1]

    def __call__(self, x):
        return np.interp(x, self.x, self.y)

    def slopes(self) -> np.ndarray:
        return np.diff(self.y) / np.diff(self.x)

    def sample(self, n: int = 101) -> np.ndarray:
        xs = np.linspace(0.0, 1.0, n)
        return np.column_stack([xs, self(xs)])


def curve_for_order(p, ctx: ThermalContext, order: Sequence[int]) -> ThermoCurve:
    p = np.asarray(p, dtype=float)
    order = tuple(order)
    x = np.concatenate([[0.0], np.cumsum(ctx.gibbs[list(order)])])
    y = np.concatenate([[0.0], np.cumsum(p[list(order)])])
    # pin the endpoint against rounding drift
    x[-1] = 1.0
    y[-1] = 1.0
    return ThermoCurve(np.column_stack([x, y]), order)


def thermo_curve(p, ctx: ThermalContext) -> ThermoCurve:
    return curve_for_order(p, ctx, beta_order(p, ctx))


def thermomajorises(p, q, ctx: ThermalContext, tol: float = CURVE_TOL) -> bool:
    """True iff the curve of ``p`` lies on or above the curve of ``q``."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.size != q.size:
        raise DimensionMismatch("states must have equal dimension")
    lp, lq = thermo_curve(p, ctx), thermo_curve(q, ctx)
    xs = np.concatenate([lp.x, lq.x])
    return bool(np.all(lp(xs) >= lq(xs) - tol))


def is_tightly_thermomajorised(p, q, ctx: ThermalContext, tol: float = TIGHT_TOL) -> bool:
    """True iff every elbow of the curve of ``q`` lies on the curve of ``p``."""
    if not thermomajorises(p, q, ctx):
        raise PreconditionViolated("p does not thermomajorise q")
    lp, lq = thermo_curve(p, ctx), thermo_curve(q, ctx)
    return bool(np.all(np.abs(lp(lq.x) - lq.y) <= tol))


def renyi_divergence(alpha: float, p, q) -> float:
    """Classical Renyi divergence ``D_alpha(p || q)`` in nats.

    ``alpha`` may be 0, 1 (Kullback-Leibler) or ``math.inf``.  Returns
    ``inf`` when the support of ``p`` is not contained in that of ``q`` for
    ``alpha >= 1``.
    """
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise DimensionMismatch("divergence arguments must have equal shape")
    if alpha < 0:
        raise ValueError("alpha must be non-negative")
    sp = p > 0
    if alpha == 0:
        mass = q[sp].sum()
        return math.inf if mass <= 0 else -math.log(mass)
    if alpha < 1:
        both = sp & (q > 0)
        s = np.sum(p[both] ** alpha * q[both] ** (1 - alpha))
        return math.inf if s <= 0 else math.log(s) / (alpha - 1)
    if np.any(q[sp] <= 0):
        return math.inf
    if alpha == 1:
        return float(np.sum(p[sp] * np.log(p[sp] / q[sp])))
    if math.isinf(alpha):
        return float(math.log(np.max(p[sp] / q[sp])))
    # log-sum-exp form keeps large alpha finite
    logs = alpha * np.log(p[sp]) + (1 - alpha) * np.log(q[sp])
    m = logs.max()
    return float((m + math.log(np.exp(logs - m).sum())) / (alpha - 1))


def free_energy_delta(alpha: float, p, ctx: ThermalContext) -> float:
    """Generalised free-energy excess over the Gibbs state, in units of 1/beta."""
    return renyi_divergence(alpha, p, ctx.gibbs) / ctx.beta


def shannon_entropy(p) -> float:
    p = np.asarray(p, dtype=float).reshape(-1)
    nz = p[p > 0]
    return float(-np.sum(nz * np.log(nz)))


def marginals(p_joint, dims: tuple[int, int]) -> tuple[np.ndarray, np.ndarray]:
    """System and catalyst marginals of a system-major flattened joint vector."""
    d_s, d_c = dims
    p = np.asarray(p_joint, dtype=float)
    if p.size != d_s * d_c:
        raise DimensionMismatch(f"joint vector has {p.size} entries, expected {d_s * d_c}")
    m = p.reshape(d_s, d_c)
    return m.sum(axis=1), m.sum(axis=0)


def mutual_information(p_joint, dims: tuple[int, int]) -> float:
    ps, pc = marginals(p_joint, dims)
    return shannon_entropy(ps) + shannon_entropy(pc) - shannon_entropy(p_joint)


def barycentric(p) -> tuple[float, float]:
    p = np.asarray(p, dtype=float)
    if p.size != 3:
        raise DimensionMismatch("barycentric coordinates need a 3-level state")
    return (
        float(math.sqrt(3) / 2 * (p[1] - p[2])),
        float(p[0] - 0.5 * (p[1] + p[2])),
    )


def from_barycentric(x: float, y: float) -> np.ndarray:
    """Inverse of :func:`barycentric` on the plane of unit-sum vectors."""
    p1 = (2 * y + 1) / 3
    rest = 1 - p1
    diff = 2 * x / math.sqrt(3)
    return np.array([p1, (rest + diff) / 2, (rest - diff) / 2])
