import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from thermocat.core import ThermalContext

settings.register_profile(
    "default",
    deadline=None,
    max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")

ENERGIES = np.array([0.0, 0.2, 0.5])
P1 = np.array([0.35, 0.55, 0.1])


@pytest.fixture
def ctx3():
    return ThermalContext(ENERGIES)


@pytest.fixture
def p1():
    return P1.copy()


@st.composite
def contexts(draw, min_dim=2, max_dim=5, degenerate=True):
    d = draw(st.integers(min_dim, max_dim))
    levels = st.sampled_from([0.0, 0.5, 1.0, 1.5]) if degenerate else st.floats(0.0, 3.0)
    e = sorted(draw(st.lists(levels, min_size=d, max_size=d)))
    return ThermalContext(np.asarray(e))


@st.composite
def populations(draw, d):
    w = draw(st.lists(st.floats(0.0, 1.0), min_size=d, max_size=d))
    w = np.asarray(w) + 1e-3
    return w / w.sum()


@st.composite
def context_and_state(draw, min_dim=2, max_dim=5, degenerate=True):
    ctx = draw(contexts(min_dim, max_dim, degenerate))
    return ctx, draw(populations(ctx.dim))


def random_state(rng, d, sparse=False):
    p = rng.dirichlet(np.ones(d))
    if sparse and d > 1:
        p[rng.integers(d)] = 0.0
        p /= p.sum()
    return p


def random_context(rng, d, degenerate=False):
    if degenerate:
        return ThermalContext(np.sort(rng.integers(0, 3, d).astype(float) * 0.5))
    return ThermalContext(np.sort(rng.uniform(0.0, 2.0, d)))


def monotonic_state(rng, ctx):
    """A state whose ratios p_i / gamma_i decrease with energy."""
    ratios = np.sort(rng.uniform(0.05, 3.0, ctx.dim))[::-1]
    p = ctx.gibbs * ratios
    return p / p.sum()


ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
