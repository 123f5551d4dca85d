"""Factorisation of energy-preserving unitaries into two-level rotations."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, PreconditionViolated

DEGENERACY_TOL = 1e-9
COMMUTATOR_TOL = 1e-10
UNITARITY_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class TwoLevelUnitary:
    """A 2x2 unitary ``block`` acting on levels ``a`` and ``b``."""

    a: int
    b: int
    block: np.ndarray

    def matrix(self, d: int) -> np.ndarray:
        m = np.eye(d, dtype=complex)
        m[np.ix_([self.a, self.b], [self.a, self.b])] = self.block
        return m

    def transition_matrix(self, d: int) -> np.ndarray:
        """Doubly stochastic action ``|U_ij|^2`` on populations."""
        return np.abs(self.matrix(d)) ** 2


@dataclass
class UnitaryDecomposition:
    """``U = factors[0] @ factors[1] @ ... @ diag(phases)``."""

    factors: list[TwoLevelUnitary]
    phases: np.ndarray
    blocks: list[list[int]]

    def reconstruct(self) -> np.ndarray:
        d = self.phases.size
        m = np.eye(d, dtype=complex)
        for f in self.factors:
            m = m @ f.matrix(d)
        return m @ np.diag(self.phases)

    @property
    def bound(self) -> int:
        return sum(len(b) * (len(b) - 1) // 2 for b in self.blocks)


def degenerate_subspaces(h0, tol: float = DEGENERACY_TOL) -> list[list[int]]:
    """Index groups of (near-)equal energies, chained at absolute tolerance ``tol``."""
    h0 = np.asarray(h0, dtype=float)
    order = np.argsort(h0, kind="stable")
    groups = [[int(order[0])]]
    for prev, cur in zip(order, order[1:]):
        if h0[cur] - h0[prev] <= tol:
            groups[-1].append(int(cur))
        else:
            groups.append([int(cur)])
    return [sorted(g) for g in groups]


def _check_shapes(u, h0):
    u = np.asarray(u, dtype=complex)
    h0 = np.asarray(h0, dtype=float).reshape(-1)
    if u.ndim != 2 or u.shape[0] != u.shape[1] or u.shape[0] != h0.size:
        raise DimensionMismatch(f"matrix shape {u.shape} does not match {h0.size} energies")
    return u, h0


def is_unitary(u, tol: float = UNITARITY_TOL) -> bool:
    u = np.asarray(u, dtype=complex)
    return bool(np.max(np.abs(u.conj().T @ u - np.eye(len(u)))) <= tol)


def is_energy_preserving(u, h0, tol: float = COMMUTATOR_TOL) -> bool:
    u, h0 = _check_shapes(u, h0)
    h = np.diag(h0)
    return bool(np.max(np.abs(u @ h - h @ u)) <= tol)


def decompose(u, h0) -> UnitaryDecomposition:
    """Reck-style Givens elimination inside each degenerate block.

    Column by column, entries below the diagonal of a block are rotated
    into the diagonal entry; whatever remains is a diagonal of phases.
    """
    u, h0 = _check_shapes(u, h0)
    if not is_unitary(u):
        raise PreconditionViolated("matrix is not unitary within 1e-10")
    if not is_energy_preserving(u, h0):
        raise PreconditionViolated("matrix does not commute with the Hamiltonian within 1e-10")
    blocks = degenerate_subspaces(h0)
    w = u.copy()
    eliminations = []
    for block in blocks:
        k = len(block)
        for ci in range(k - 1):
            col = block[ci]
            for ri in range(ci + 1, k):
                row = block[ri]
                x, y = w[col, col], w[row, col]
                if abs(y) <= 1e-15:
                    continue
                n = np.hypot(abs(x), abs(y))
                g = np.array([[np.conj(x), np.conj(y)], [-y, x]]) / n
                rows = [col, row]
                w[rows, :] = g @ w[rows, :]
                eliminations.append(TwoLevelUnitary(col, row, g))
    # w = G_m ... G_1 U is diagonal, so U = G_1^dag ... G_m^dag w
    factors = [TwoLevelUnitary(e.a, e.b, e.block.conj().T) for e in eliminations]
    phases = np.diag(w).copy()
    return UnitaryDecomposition(factors, phases, blocks)


def random_energy_preserving(h0, rng: np.random.Generator) -> np.ndarray:
    """Haar-like random unitary that is block diagonal on degenerate subspaces."""
    h0 = np.asarray(h0, dtype=float)
    d = h0.size
    u = np.zeros((d, d), dtype=complex)
    for block in degenerate_subspaces(h0):
        k = len(block)
        z = (rng.standard_normal((k, k)) + 1j * rng.standard_normal((k, k))) / np.sqrt(2)
        q, r = np.linalg.qr(z)
        q = q * (np.diag(r) / np.abs(np.diag(r)))
        u[np.ix_(block, block)] = q
    return u
