import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import context_and_state, monotonic_state, random_context, random_state
from thermocat import lp
from thermocat.core import (
    ThermalContext,
    all_beta_orders,
    barycentric,
    beta_order,
    gibbs_population,
    is_tightly_thermomajorised,
    thermomajorises,
)
from thermocat.errors import BudgetExceeded, DimensionMismatch, PreconditionViolated
from thermocat.reach import (
    eto_extreme_points,
    eto_extreme_points_monotonic,
    eto_extremes_bruteforce,
    gibbs_stochastic_feasible,
    membership,
    mto_extreme_candidates,
    plt_sequence,
    standard_formation,
    standard_formation_plan,
    tight_state,
    to_extreme_points,
)
from thermocat.swaps import SwapSequence, apply, beta_swap, is_neighbouring


def same_vertices(a, b, tol=1e-9):
    a, b = np.asarray(a), np.asarray(b)
    if a.shape != b.shape:
        return False
    return all(np.min(np.max(np.abs(b - v), axis=1)) <= tol for v in a)


# ---------------------------------------------------------------- TO


def test_to_gibbs_single_vertex(ctx3):
    r = to_extreme_points(ctx3.gibbs, ctx3)
    assert len(r) == 1 and np.allclose(r.vertices[0], ctx3.gibbs)


def test_to_pure_qubit():
    ctx = ThermalContext(np.array([0.0, 0.7]))
    r = to_extreme_points([1, 0], ctx)
    d = math.exp(-0.7)
    assert same_vertices(r.vertices, [[1, 0], [1 - d, d]])


def test_to_p1_six_tight_vertices(ctx3, p1):
    r = to_extreme_points(p1, ctx3)
    assert len(r) == 6
    for v in r.vertices:
        assert is_tightly_thermomajorised(p1, v, ctx3)
        assert gibbs_stochastic_feasible(p1, v, ctx3)
    assert r.contains(p1) and r.contains(ctx3.gibbs)


@given(context_and_state(2, 4))
def test_tight_state_has_requested_order(case):
    ctx, p = case
    for order in itertools.permutations(range(ctx.dim)):
        q = tight_state(p, ctx, order)
        assert abs(q.sum() - 1) < 1e-12 and q.min() >= -1e-12
        assert is_tightly_thermomajorised(p, q, ctx)


def test_gibbs_stochastic_feasible_examples(ctx3, p1):
    assert gibbs_stochastic_feasible(p1, ctx3.gibbs, ctx3)
    assert not gibbs_stochastic_feasible(ctx3.gibbs, p1, ctx3)
    with pytest.raises(DimensionMismatch):
        gibbs_stochastic_feasible(p1, [0.5, 0.5], ctx3)


def test_duality_random_d4():
    rng = np.random.default_rng(4)
    for _ in range(40):
        ctx = random_context(rng, 4, degenerate=bool(rng.integers(2)))
        p = random_state(rng, 4)
        # half of the targets are reachable by construction
        q = apply(SwapSequence((beta_swap(0, 3, ctx), beta_swap(1, 2, ctx)), 4), p) if rng.integers(2) else random_state(rng, 4)
        assert thermomajorises(p, q, ctx) == gibbs_stochastic_feasible(p, q, ctx)


# ---------------------------------------------------------------- standard formation


def test_standard_formation_reference():
    ctx = ThermalContext(np.array([0.0, 0.1, 0.2, 0.3]))
    seq = standard_formation((0, 1, 2, 3), (3, 1, 2, 0), ctx)
    assert seq.notation() == "β(1,3) β(1,2) β(1,4) β(2,4) β(3,4)"
    blocks, orders = standard_formation_plan((0, 1, 2, 3), (3, 1, 2, 0))
    assert orders == [(0, 1, 2, 3), (3, 0, 1, 2), (3, 1, 0, 2), (3, 1, 2, 0)]
    assert [p for blk in blocks for p in blk] == [(2, 3), (1, 3), (0, 3), (0, 1), (0, 2)]


def test_standard_formation_trivial_cases():
    c2 = ThermalContext(np.array([0.0, 0.5]))
    assert len(standard_formation((0, 1), (0, 1), c2).processes) == 0
    assert standard_formation((0, 1), (1, 0), c2).notation() == "β(1,2)"


@given(st.integers(2, 5), st.data())
def test_standard_formation_neighbouring_without_repeats(d, data):
    pi = tuple(data.draw(st.permutations(range(d))))
    target = tuple(data.draw(st.permutations(range(d))))
    ctx = ThermalContext(np.linspace(0.0, 1.0, d))
    ratios = np.empty(d)
    ratios[list(pi)] = np.linspace(2.0, 0.5, d)
    p = ctx.gibbs * ratios
    p /= p.sum()
    seq = standard_formation(pi, target, ctx)
    pairs = [proc.pair for proc in seq.processes]
    assert len(pairs) == len(set(pairs))
    x = p
    for proc in seq.processes:
        assert is_neighbouring(proc, x, ctx)
        x = apply(proc, x)
    assert target in all_beta_orders(x, ctx)


# ---------------------------------------------------------------- ETO


def test_eto_monotonic_examples():
    ctx = ThermalContext(np.array([0.0, 0.4, 0.5]))
    r = eto_extreme_points_monotonic(ctx.gibbs, ctx)
    assert len(r) == 1
    q = ThermalContext(np.array([0.0, 0.7]))
    d = math.exp(-0.7)
    assert same_vertices(eto_extreme_points_monotonic([1, 0], q).vertices, [[1, 0], [1 - d, d]])
    cold = gibbs_population(2 * ctx.energies)
    r = eto_extreme_points_monotonic(cold, ctx)
    assert len(r) == 6
    assert all(thermomajorises(cold, v, ctx) for v in r.vertices)
    assert same_vertices(r.vertices, eto_extremes_bruteforce(cold, ctx, l_max=3).vertices)
    with pytest.raises(PreconditionViolated):
        eto_extreme_points_monotonic([0.35, 0.55, 0.1], ThermalContext(np.array([0.0, 0.2, 0.5])))


def test_sequences_reproduce_vertices():
    ctx = ThermalContext(np.array([0.0, 0.3, 0.45, 1.0]))
    p = monotonic_state(np.random.default_rng(1), ctx)
    r = eto_extreme_points_monotonic(p, ctx)
    for i, v in enumerate(r.vertices):
        assert np.allclose(apply(r.sequence(i), p), v, atol=1e-12)


def test_per_order_uniqueness():
    rng = np.random.default_rng(7)
    for _ in range(10):
        ctx = random_context(rng, 4)
        p = monotonic_state(rng, ctx)
        r = eto_extreme_points_monotonic(p, ctx, reduce=False)
        seen = {}
        for v in r.vertices:
            for order in all_beta_orders(v, ctx):
                if order in seen:
                    assert np.max(np.abs(seen[order] - v)) <= 1e-9
                seen[order] = v


def test_bruteforce_qubit_matches_monotonic():
    ctx = ThermalContext(np.array([0.0, 0.4]))
    p = np.array([0.8, 0.2])
    assert same_vertices(
        eto_extremes_bruteforce(p, ctx, l_max=1).vertices,
        eto_extreme_points_monotonic(p, ctx).vertices,
    )


def test_bruteforce_reference_instance(ctx3, p1):
    r = eto_extremes_bruteforce(p1, ctx3, l_max=3)
    bary = np.array([barycentric(v) for v in r.vertices])
    for target in [(-0.184, 0.097), (-0.171, 0.180)]:
        assert np.min(np.max(np.abs(bary - target), axis=1)) < 1e-3
    closed = eto_extreme_points(p1, ctx3)
    assert same_vertices(closed.vertices, r.vertices)
    for i, v in enumerate(r.vertices):
        assert np.allclose(apply(r.sequence(i), p1), v, atol=1e-12)


def test_bruteforce_budget(ctx3, p1, monkeypatch):
    with pytest.raises(BudgetExceeded):
        eto_extremes_bruteforce(p1, ctx3, budget=3)
    monkeypatch.setenv("THERMOCAT_BUDGET", "2")
    with pytest.raises(BudgetExceeded):
        eto_extremes_bruteforce(p1, ctx3)


def test_bruteforce_degenerate_levels():
    ctx = ThermalContext(np.array([0.0, 0.5, 0.5]))
    p = np.array([0.5, 0.35, 0.15])
    r = eto_extremes_bruteforce(p, ctx)
    # closed under swapping the degenerate pair
    assert same_vertices(r.vertices, r.vertices[:, [0, 2, 1]])
    for i, v in enumerate(r.vertices):
        assert np.allclose(apply(r.sequence(i), p), v, atol=1e-12)


def test_vertex_set_invariants(ctx3, p1):
    r = eto_extreme_points(p1, ctx3)
    assert r.contains(p1) and r.contains(ctx3.gibbs)
    for i, v in enumerate(r.vertices):
        assert thermomajorises(p1, v, ctx3)
        others = np.delete(r.vertices, i, axis=0)
        assert np.min(np.max(np.abs(others - v), axis=1)) > 1e-9
        assert lp.convex_weights(others, v)[1] > 1e-9


def test_repeated_or_non_neighbouring_swaps_stay_inside():
    ctx = ThermalContext(np.array([0.0, 0.2, 0.5]))
    p = np.array([0.6, 0.3, 0.1])
    r = eto_extreme_points_monotonic(p, ctx)
    b12 = beta_swap(0, 1, ctx)
    for seq in [(b12, b12), (beta_swap(0, 2, ctx),)]:
        q = apply(SwapSequence(seq, 3), p)
        cert = membership(r, q)
        assert cert is not None and np.all(cert.weights < 1 - 1e-6)


# ---------------------------------------------------------------- MTO


def test_mto_qubit_excited_state():
    ctx = ThermalContext(np.array([0.0, 0.7]))
    r = mto_extreme_candidates([0, 1], ctx)
    assert same_vertices(r.vertices, [[0, 1], ctx.gibbs])
    assert not r.contains([1, 0])
    assert to_extreme_points([0, 1], ctx).contains([1, 0])


def test_mto_gibbs(ctx3):
    r = mto_extreme_candidates(ctx3.gibbs, ctx3)
    assert len(r) == 1


def test_inclusion_chain_small():
    rng = np.random.default_rng(11)
    for _ in range(10):
        ctx = random_context(rng, 3)
        p = random_state(rng, 3)
        mto = mto_extreme_candidates(p, ctx)
        eto = eto_extreme_points(p, ctx)
        to = to_extreme_points(p, ctx)
        assert all(eto.contains(v) for v in mto.vertices)
        assert all(to.contains(v) and thermomajorises(p, v, ctx) for v in eto.vertices)


# ---------------------------------------------------------------- membership


def test_membership(ctx3, p1):
    r = to_extreme_points(p1, ctx3)
    cert = membership(r, p1)
    assert cert is not None
    assert abs(cert.weights.sum() - 1) <= 1e-10
    assert np.max(np.abs(cert.reconstruct(r.vertices) - p1)) <= 1e-9
    assert membership(r, [1.2, -0.1, -0.1]) is None
    assert membership(r, [0, 0, 1]) is None
    with pytest.raises(DimensionMismatch):
        membership(r, [0.5, 0.5])
    mid = 0.5 * (r.vertices[0] + r.vertices[1])
    cert = membership(r, mid)
    assert np.max(np.abs(cert.reconstruct(r.vertices) - mid)) <= 1e-9


# ---------------------------------------------------------------- PLT


def test_plt_examples(ctx3, p1):
    assert len(plt_sequence(p1, p1, ctx3).processes) == 0
    tight = tight_state(p1, ctx3, beta_order(p1, ctx3))
    mid = 0.5 * (p1 + tight)
    seq = plt_sequence(p1, mid, ctx3)
    assert np.max(np.abs(apply(seq, p1) - mid)) <= 1e-9
    with pytest.raises(PreconditionViolated):
        plt_sequence(ctx3.gibbs, p1, ctx3)


@settings(max_examples=40)
@given(context_and_state(2, 5, degenerate=False), st.floats(0.0, 1.0))
def test_plt_reaches_same_order_targets(case, t):
    ctx, p = case
    order = beta_order(p, ctx)
    q = t * p + (1 - t) * ctx.gibbs
    seq = plt_sequence(p, q, ctx)
    assert np.max(np.abs(apply(seq, p) - q)) <= 1e-9
    for proc in seq.processes:
        i, j = order.index(proc.pair[0]), order.index(proc.pair[1])
        assert abs(i - j) == 1
