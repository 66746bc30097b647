from __future__ import annotations

import itertools

import numpy as np
import pytest
from hypothesis import strategies as st

from loopwatch import datasets
from loopwatch.network import Arc, WeightedDigraph

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def clean6():
    return datasets.load("six_node_clean")


@pytest.fixture
def blunder6():
    return datasets.load("six_node_blunder")


@pytest.fixture
def campaign():
    return datasets.load("campaign_x")


@pytest.fixture
def campaign_blunder():
    return datasets.load("campaign_x_blunder")


def triangle(w12=1.0, w23=2.0, w13=3.0) -> WeightedDigraph:
    return WeightedDigraph.from_arcs([("1", "2", w12), ("2", "3", w23), ("1", "3", w13)])


@st.composite
def networks(draw, min_n=2, max_n=6, integer=True, connected=False, potential=False):
    """Random simple networks on vertices "0".."n-1".

    ``potential`` draws vertex potentials and sets w(u->v) = phi(v) - phi(u),
    giving a network that satisfies the loop law.
    """
    n = draw(st.integers(min_n, max_n))
    pairs = list(itertools.combinations(range(n), 2))
    chosen = draw(st.lists(st.sampled_from(pairs), unique=True, min_size=1 if n > 1 else 0, max_size=len(pairs)))
    if connected:
        # a random spanning path guarantees weak connectivity
        perm = draw(st.permutations(range(n)))
        for a, b in zip(perm, perm[1:]):
            pair = (min(a, b), max(a, b))
            if pair not in chosen:
                chosen.append(pair)
    value = st.integers(-5, 5).map(float) if integer else st.floats(-5, 5, allow_nan=False)
    phi = [draw(value) for _ in range(n)]
    arcs = []
    for a, b in chosen:
        flip = draw(st.booleans())
        u, v = (b, a) if flip else (a, b)
        w = phi[v] - phi[u] if potential else draw(value)
        arcs.append(Arc(str(u), str(v), w))
    return WeightedDigraph(tuple(str(i) for i in range(n)), tuple(arcs))


def random_network(rng: np.random.Generator, n: int, p: float = 0.6, potential: bool = False, integer: bool = False) -> WeightedDigraph:
    """Seeded counterpart of ``networks`` for loop-style acceptance checks; always connected."""
    perm = rng.permutation(n)
    pairs = {tuple(sorted((int(a), int(b)))) for a, b in zip(perm, perm[1:])}
    for a, b in itertools.combinations(range(n), 2):
        if rng.random() < p:
            pairs.add((a, b))
    phi = rng.integers(-5, 6, n).astype(float) if integer else rng.uniform(-50, 50, n)
    arcs = []
    for a, b in sorted(pairs):
        u, v = (b, a) if rng.random() < 0.5 else (a, b)
        if potential:
            w = phi[v] - phi[u]
        else:
            w = float(rng.integers(-5, 6)) if integer else float(rng.uniform(-3, 3))
        arcs.append(Arc(str(u), str(v), float(w)))
    return WeightedDigraph(tuple(str(i) for i in range(n)), tuple(arcs))
