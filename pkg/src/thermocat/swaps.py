"""Two-level Gibbs-stochastic processes and their action on states and orders."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .core import BetaOrder, ThermalContext, _tie_groups, population
from .errors import DimensionMismatch, PreconditionViolated

GS_ENTRY_TOL = 1e-12
GS_SUM_TOL = 1e-10


@dataclass(frozen=True)
class TwoLevelProcess:
    """``M_lambda`` acting on levels ``j`` and ``k`` with ``E_j <= E_k``.

    ``lam = 1`` is a beta-swap, ``lam = 1 / (1 + delta)`` a T-swap.
    """

    j: int
    k: int
    lam: float
    delta: float

    @classmethod
    def make(cls, j: int, k: int, lam: float, ctx: ThermalContext) -> "TwoLevelProcess":
        if j == k:
            raise ValueError("a two-level process needs two distinct levels")
        for i in (j, k):
            if not 0 <= i < ctx.dim:
                raise IndexError(f"level {i} out of range for dimension {ctx.dim}")
        if not -1e-15 <= lam <= 1 + 1e-15:
            raise ValueError(f"lambda must lie in [0, 1], got {lam}")
        e = ctx.energies
        if (e[k], k) < (e[j], j):
            j, k = k, j
        return cls(int(j), int(k), float(min(max(lam, 0.0), 1.0)), ctx.delta(j, k))

    @property
    def pair(self) -> tuple[int, int]:
        return (self.j, self.k)

    @property
    def is_beta_swap(self) -> bool:
        return self.lam == 1.0

    def block(self) -> np.ndarray:
        lam, dl = self.lam, self.delta
        return np.array([[1 - lam * dl, lam], [lam * dl, 1 - lam]])

    def label(self, labels: Sequence[str] | None = None) -> str:
        a, b = (self.j + 1, self.k + 1) if labels is None else (labels[self.j], labels[self.k])
        if self.is_beta_swap:
            return f"β({a},{b})"
        return f"M[{self.lam:.6g}]({a},{b})"


def beta_swap(j: int, k: int, ctx: ThermalContext) -> TwoLevelProcess:
    return TwoLevelProcess.make(j, k, 1.0, ctx)


def t_swap(j: int, k: int, ctx: ThermalContext) -> TwoLevelProcess:
    return TwoLevelProcess.make(j, k, 1.0 / (1.0 + ctx.delta(j, k)), ctx)


@dataclass(frozen=True)
class SwapSequence:
    """Two-level processes in application order (``processes[0]`` acts first)."""

    processes: tuple[TwoLevelProcess, ...] = ()
    dim: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "processes", tuple(self.processes))
        if self.dim is not None:
            for proc in self.processes:
                if max(proc.j, proc.k) >= self.dim:
                    raise DimensionMismatch("process references a level outside the sequence dimension")

    def __len__(self):
        return len(self.processes)

    def __iter__(self):
        return iter(self.processes)

    def __getitem__(self, i):
        return self.processes[i]

    def then(self, proc: TwoLevelProcess) -> "SwapSequence":
        return SwapSequence(self.processes + (proc,), self.dim)

    def matrix(self, d: int | None = None) -> np.ndarray:
        d = d or self.dim
        if d is None:
            raise ValueError("dimension unknown")
        m = np.eye(d)
        for proc in self.processes:
            m = partial_swap_matrix(proc, d) @ m
        return m

    def pairs(self) -> list[tuple[int, int]]:
        return [proc.pair for proc in self.processes]

    def notation(self, labels: Sequence[str] | None = None) -> str:
        """Operator-product notation: rightmost factor acts first."""
        if not self.processes:
            return "1"
        return " ".join(proc.label(labels) for proc in reversed(self.processes))


def partial_swap_matrix(proc: TwoLevelProcess, d: int) -> np.ndarray:
    if max(proc.j, proc.k) >= d:
        raise IndexError(f"levels {proc.pair} out of range for dimension {d}")
    m = np.eye(d)
    idx = np.ix_([proc.j, proc.k], [proc.j, proc.k])
    m[idx] = proc.block()
    return m


def _apply_one(proc: TwoLevelProcess, p: np.ndarray) -> np.ndarray:
    # works on a single vector or a batch stacked along the first axis
    q = p.copy()
    pj, pk = p[..., proc.j], p[..., proc.k]
    lam, dl = proc.lam, proc.delta
    q[..., proc.j] = (1 - lam * dl) * pj + lam * pk
    q[..., proc.k] = lam * dl * pj + (1 - lam) * pk
    return q


def apply(op: TwoLevelProcess | SwapSequence | Iterable[TwoLevelProcess], p) -> np.ndarray:
    """Apply a process or a sequence of processes to a population vector."""
    q = np.asarray(p, dtype=float).copy()
    procs = (op,) if isinstance(op, TwoLevelProcess) else tuple(op)
    if isinstance(op, SwapSequence) and op.dim is not None and q.shape[-1] != op.dim:
        raise DimensionMismatch(f"sequence has dimension {op.dim}, state has {q.shape[-1]}")
    for proc in procs:
        if max(proc.j, proc.k) >= q.shape[-1]:
            raise DimensionMismatch(f"levels {proc.pair} out of range for a {q.shape[-1]}-level state")
        q = _apply_one(proc, q)
    return q / q.sum(axis=-1, keepdims=True)


def is_gibbs_stochastic(m, ctx: ThermalContext) -> bool:
    m = np.asarray(m, dtype=float)
    if m.shape != (ctx.dim, ctx.dim):
        raise DimensionMismatch(f"matrix shape {m.shape} does not match dimension {ctx.dim}")
    return bool(
        np.all(m >= -GS_ENTRY_TOL)
        and np.all(np.abs(m.sum(axis=0) - 1) <= GS_SUM_TOL)
        and np.max(np.abs(m @ ctx.gibbs - ctx.gibbs)) <= GS_SUM_TOL
    )


def is_neighbouring(proc: TwoLevelProcess, p, ctx: ThermalContext) -> bool:
    """True iff some valid beta-order of ``p`` puts the two levels next to each other."""
    groups = _tie_groups(population(p, ctx.dim), ctx)
    where = {i: n for n, grp in enumerate(groups) for i in grp}
    # tied levels can be permuted freely inside their group
    return abs(where[proc.j] - where[proc.k]) <= 1


def order_after_neighbouring_swap(order: Sequence[int], position: int, direction: int) -> BetaOrder:
    """Transpose entries ``position`` and ``position + direction`` of an order."""
    order = tuple(order)
    if direction not in (-1, 0, 1):
        raise PreconditionViolated("direction must be -1, 0 or +1")
    other = position + direction
    if not (0 <= position < len(order) and 0 <= other < len(order)):
        raise PreconditionViolated(f"positions {position}, {other} outside an order of length {len(order)}")
    out = list(order)
    out[position], out[other] = out[other], out[position]
    return tuple(out)


def order_after_swap(order: Sequence[int], j: int, k: int) -> BetaOrder:
    """Order after a beta-swap on two levels that are adjacent in ``order``."""
    order = tuple(order)
    a, b = order.index(j), order.index(k)
    if abs(a - b) != 1:
        raise PreconditionViolated(f"levels {j + 1} and {k + 1} are not adjacent in {order}")
    return order_after_neighbouring_swap(order, min(a, b), 1)
