import itertools
import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import networks, triangle
from loopwatch import datasets
from loopwatch.errors import NetworkError, NumericOverflowError, OracleLimitError, TermBudgetExceeded
from loopwatch.exppoly import ExpPoly, ep_eval
from loopwatch.matrix import (
    adjacency,
    asymptotic_diag_slope,
    build_poly_matrix,
    numeric_eval,
    power_diagonals,
    symbolic_power,
    walk_oracle,
)
from loopwatch.network import Arc, WeightedDigraph


def brute_force_closed_walks(G, r):
    """Exponent sums of all closed r-walks, from vertex sequences directly."""
    signed = {}
    for a in G.arcs:
        signed[(a.tail, a.head)] = a.weight
        signed[(a.head, a.tail)] = -a.weight
    out = {v: [] for v in G.vertices}
    for seq in itertools.product(G.vertices, repeat=r):
        walk = seq + (seq[0],)
        steps = list(zip(walk, walk[1:]))
        if all(s in signed for s in steps):
            out[seq[0]].append(sum(signed[s] for s in steps))
    return out


def test_build_examples(clean6):
    A1 = numeric_eval(build_poly_matrix(clean6), 1.0)
    np.testing.assert_array_equal(A1, adjacency(clean6))
    zero = WeightedDigraph.from_arcs([("a", "b", 0.0), ("b", "c", 0.0)])
    for z in (0.3, 2.0, 9.0):
        np.testing.assert_array_equal(numeric_eval(build_poly_matrix(zero), z), adjacency(zero))
    M = build_poly_matrix(triangle(1.0, 2.0, 4.0), [("1", "3")])
    assert M.entry(0, 2) == ExpPoly.monomial(4, {0: 1})
    assert M.entry(2, 0) == ExpPoly.monomial(-4, {0: -1})
    with pytest.raises(NetworkError):
        build_poly_matrix(triangle(), [("1", "4")])


def test_suspect_orientation_follows_request():
    M = build_poly_matrix(triangle(1.0, 2.0, 4.0), [("3", "1")])
    # requested 3->1 so x adds to w(3->1) = -4
    assert M.entry(2, 0) == ExpPoly.monomial(-4, {0: 1})


def test_numeric_eval_examples():
    M = build_poly_matrix(WeightedDigraph.from_arcs([("a", "b", 3.0)]))
    assert numeric_eval(M, 2.0)[0, 1] == 8.0
    with pytest.raises(NumericOverflowError, match="gauge_fix"):
        numeric_eval(build_poly_matrix(datasets.load("campaign_x")), 2.0)


def test_power_diagonals_worked_examples(clean6, blunder6):
    assert power_diagonals(clean6, 2.0, 6).norms == [0.0] * 6
    s = power_diagonals(blunder6, 2.0, 6)
    np.testing.assert_allclose(s.norms, [0, 0, 0, 6, 7.5, 78], atol=1e-9)
    np.testing.assert_allclose(s.diag(4), [1, 1.5, 0.5, 0.5, 1, 1.5], atol=1e-9)


def test_power_diagonals_triangle_against_enumeration():
    G = triangle(1.0, 2.0, 4.0)
    walks = brute_force_closed_walks(G, 3)
    expected = [sum(2.0**w for w in walks[v]) - len(walks[v]) for v in G.vertices]
    assert expected == [0.5, 0.5, 0.5]
    s = power_diagonals(G, 2.0, 3)
    np.testing.assert_allclose(s.diag(3), expected, atol=1e-12)
    assert s.norm(3) == pytest.approx(1.5)


def test_power_diagonals_json_shape(blunder6):
    d = power_diagonals(blunder6, 2.0, 2).to_dict()
    json.dumps(d)
    assert d["z"] == 2.0 and [e["r"] for e in d["series"]] == [1, 2] and len(d["series"][0]["diag"]) == 6


def test_power_diagonals_rejects_bad_z(clean6):
    for z in (1.0, 0.0, -2.0):
        with pytest.raises(ValueError):
            power_diagonals(clean6, z)


def test_symbolic_power_examples(blunder6):
    M = build_poly_matrix(triangle(1.0, 2.0, 4.0))
    P0 = symbolic_power(M, 0)
    assert all(P0.entry(i, i) == ExpPoly.const(1.0) for i in range(3)) and len(P0.entries) == 3
    P3 = symbolic_power(M, 3)
    assert P3.entry(0, 0) == ExpPoly.monomial(1) + ExpPoly.monomial(-1)
    P4 = symbolic_power(build_poly_matrix(blunder6), 4)
    diff = [ep_eval(p, 2.0) - ep_eval(p, 1.0) for p in P4.diagonal()]
    np.testing.assert_allclose(diff, [1, 1.5, 0.5, 0.5, 1, 1.5], atol=1e-12)


def test_symbolic_budget(clean6):
    with pytest.raises(TermBudgetExceeded):
        symbolic_power(build_poly_matrix(clean6), 5, budget=50)


def test_symbolic_budget_from_environment(clean6, monkeypatch):
    monkeypatch.setenv("LOOPWATCH_TERM_BUDGET", "10")
    with pytest.raises(TermBudgetExceeded):
        symbolic_power(build_poly_matrix(clean6), 3)


def test_walk_oracle_examples():
    T = triangle(1.0, 2.0, 3.0)
    assert walk_oracle(T, "1", "1", 3) == ExpPoly.const(2.0)
    assert walk_oracle(T, "1", "2", 1) == ExpPoly.monomial(1.0)
    G = WeightedDigraph(("a", "b", "c", "d"), (Arc("a", "b", 1.0), Arc("c", "d", 1.0)))
    assert walk_oracle(G, "a", "c", 3) == ExpPoly()
    with pytest.raises(OracleLimitError):
        walk_oracle(T, "1", "1", 9)


def test_asymptotic_slope_examples(blunder6, clean6):
    e, vec = asymptotic_diag_slope(blunder6, 4)
    assert e == 1.0 and vec.tolist() == [2, 3, 1, 1, 2, 3]
    e, vec = asymptotic_diag_slope(clean6, 4)
    assert e == 0.0 and not vec.any()
    e, vec = asymptotic_diag_slope(triangle(1.0, 2.0, 4.0), 3)
    assert e == 1.0 and vec.tolist() == [1, 1, 1]


def test_asymptotic_slope_is_a_limit(blunder6):
    # (A(z)^4 - A(1)^4) / z approaches the slope vector for large z
    z = 1e6
    d = power_diagonals(blunder6, z, 4).diag(4) / z
    np.testing.assert_allclose(d, [2, 3, 1, 1, 2, 3], rtol=1e-5)


# -- properties ----------------------------------------------------------


@settings(max_examples=60, deadline=None)
@given(networks(max_n=6), st.integers(0, 5))
def test_symbolic_power_matches_walk_oracle(G, r):
    P = symbolic_power(build_poly_matrix(G), r)
    for i, u in enumerate(G.vertices):
        for j, v in enumerate(G.vertices):
            assert P.entry(i, j) == walk_oracle(G, u, v, r)


@settings(max_examples=30, deadline=None)
@given(networks(max_n=5, integer=False), st.integers(1, 4))
def test_symbolic_power_matches_oracle_with_suspects(G, r):
    suspects = [(a.head, a.tail) for a in G.arcs[:2]]
    P = symbolic_power(build_poly_matrix(G, suspects), r)
    for i, u in enumerate(G.vertices):
        for j, v in enumerate(G.vertices):
            assert P.entry(i, j).isclose(walk_oracle(G, u, v, r, suspects))


@settings(max_examples=60, deadline=None)
@given(networks(potential=True, integer=False, max_n=7))
def test_consistent_networks_have_zero_deviation(G):
    for z in (0.5, 2.0, 3.0):
        s = power_diagonals(G, z, 6)
        assert max(s.norms) <= 1e-9


@settings(max_examples=60, deadline=None)
@given(networks(integer=False, max_n=6), st.floats(0.2, 5).filter(lambda z: abs(z - 1) > 1e-3))
def test_deviation_nonnegative_and_reciprocal_symmetric(G, z):
    a = power_diagonals(G, z, 6)
    b = power_diagonals(G, 1 / z, 6)
    for r in range(1, 7):
        assert a.diag(r).min() >= -1e-12 * max(1.0, np.abs(a.diag(r)).max())
        np.testing.assert_allclose(a.diag(r), b.diag(r), rtol=1e-9, atol=1e-9)


@settings(max_examples=40, deadline=None)
@given(networks(integer=False, max_n=5), st.integers(1, 5), st.floats(0.5, 2.5), st.floats(-1, 1))
def test_numeric_symbolic_agreement(G, r, z, x):
    suspects = [(G.arcs[0].tail, G.arcs[0].head)] if G.arcs else []
    M = build_poly_matrix(G, suspects)
    xs = [x] * len(suspects)
    lhs = numeric_eval(symbolic_power(M, r), z, xs)
    rhs = np.linalg.matrix_power(numeric_eval(M, z, xs), r)
    np.testing.assert_allclose(lhs, rhs, rtol=1e-8, atol=1e-10)
