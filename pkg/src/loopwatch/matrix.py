"""Polynomial matrix A(z) of a network, its powers and diagonal deviations.

``A(z)[u, v] = z**w`` for an arc u -> v of weight w and ``z**-w`` in the
reverse slot, so ``A(1)`` is the adjacency matrix of the underlying graph
and ``(A(z)**r)[u, v]`` sums ``z**w*(p)`` over all r-walks p from u to v.
A network obeys the loop law exactly when the diagonals of all powers do
not depend on z.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import NetworkError, NumericOverflowError, OracleLimitError, TermBudgetExceeded, UsageError
from .exppoly import MAX_LOG, ZERO, AffineExponent, ExpPoly
from .network import Arc, WeightedDigraph, gauge_fix_all

DEFAULT_TERM_BUDGET = 1_000_000
MAX_SUSPECTS = 8
NORMS = ("l1", "l2")


def term_budget() -> int:
    value = os.environ.get("LOOPWATCH_TERM_BUDGET")
    return int(value) if value else DEFAULT_TERM_BUDGET


@dataclass(frozen=True)
class PolyMatrix:
    """Square matrix of ExpPoly entries; absent keys are zero."""

    vertices: tuple[str, ...]
    entries: Mapping[tuple[int, int], ExpPoly]

    @property
    def n(self) -> int:
        return len(self.vertices)

    def entry(self, i: int, j: int) -> ExpPoly:
        return self.entries.get((i, j), ZERO)

    def diagonal(self) -> list[ExpPoly]:
        return [self.entry(i, i) for i in range(self.n)]

    def trace(self) -> ExpPoly:
        return ExpPoly(t for p in self.diagonal() for t in p.terms)

    @property
    def num_terms(self) -> int:
        return sum(len(p) for p in self.entries.values())

    @property
    def num_vars(self) -> int:
        return max((p.num_vars for p in self.entries.values()), default=0)


def _suspect_pairs(suspects: Iterable[Arc | tuple[str, str]]) -> list[tuple[str, str]]:
    pairs = []
    for s in suspects:
        pairs.append((s.tail, s.head) if isinstance(s, Arc) else (str(s[0]), str(s[1])))
    return pairs


def build_poly_matrix(G: WeightedDigraph, suspects: Sequence[Arc | tuple[str, str]] = ()) -> PolyMatrix:
    """A(z) for ``G``; the i-th suspect u -> v gets weight ``w(u->v) + x_i``."""
    pairs = _suspect_pairs(suspects)
    if len(pairs) > MAX_SUSPECTS:
        raise UsageError(f"at most {MAX_SUSPECTS} suspect arcs are supported, got {len(pairs)}")
    variable: dict[frozenset[str], tuple[int, str]] = {}
    for i, (u, v) in enumerate(pairs):
        if G.find_arc(u, v) is None:
            raise NetworkError(f"suspect {u}-{v} is not a baseline of the network")
        key = frozenset((u, v))
        if key in variable:
            raise UsageError(f"suspect {u}-{v} listed twice")
        variable[key] = (i, u)
    entries: dict[tuple[int, int], ExpPoly] = {}
    for arc in G.arcs:
        i, j = G.index(arc.tail), G.index(arc.head)
        coeffs: dict[int, int] = {}
        if arc.pair in variable:
            var, start = variable[arc.pair]
            coeffs = {var: 1 if start == arc.tail else -1}
        forward = AffineExponent.make(arc.weight, coeffs)
        entries[(i, j)] = ExpPoly([(forward, 1.0)])
        entries[(j, i)] = ExpPoly([(forward.negated(), 1.0)])
    return PolyMatrix(G.vertices, entries)


def numeric_eval(M: PolyMatrix, z: float, x: Sequence[float] = ()) -> np.ndarray:
    """Evaluate every entry at (z, x) into a dense array."""
    if not z > 0:
        raise ValueError(f"z must be positive, got {z!r}")
    lz = math.log(z)
    out = np.zeros((M.n, M.n))
    for (i, j), p in M.entries.items():
        total = []
        for e, c in p.terms:
            arg = e.value(x) * lz
            if abs(arg) > MAX_LOG:
                raise NumericOverflowError(
                    f"entry ({M.vertices[i]}, {M.vertices[j]}) has |exponent * ln z| = {abs(arg):.0f} > "
                    f"{MAX_LOG:.0f}; gauge_fix the network first"
                )
            total.append(c * z ** e.value(x))
        out[i, j] = math.fsum(total)
    return out


def adjacency(G: WeightedDigraph) -> np.ndarray:
    """A(1): the 0/1 adjacency matrix of the underlying graph."""
    A = np.zeros((G.n, G.n))
    for arc in G.arcs:
        i, j = G.index(arc.tail), G.index(arc.head)
        A[i, j] = A[j, i] = 1.0
    return A


@dataclass(frozen=True)
class DeviationEntry:
    r: int
    diag: tuple[float, ...]

    @property
    def l1(self) -> float:
        return math.fsum(abs(d) for d in self.diag)

    @property
    def l2(self) -> float:
        return math.sqrt(math.fsum(d * d for d in self.diag))


@dataclass(frozen=True)
class DeviationSeries:
    """diag(A(z)**r) - diag(A(1)**r) for r = 1..r_max with the chosen norm."""

    z: float
    entries: tuple[DeviationEntry, ...]
    norm_kind: str = "l1"

    def norm(self, r: int) -> float:
        e = self.entries[r - 1]
        return e.l1 if self.norm_kind == "l1" else e.l2

    @property
    def norms(self) -> list[float]:
        return [self.norm(e.r) for e in self.entries]

    def diag(self, r: int) -> np.ndarray:
        return np.array(self.entries[r - 1].diag)

    @property
    def r_max(self) -> int:
        return len(self.entries)

    def to_dict(self) -> dict:
        return {
            "z": self.z,
            "norm": self.norm_kind,
            "series": [{"r": e.r, "norm": self.norm(e.r), "diag": list(e.diag)} for e in self.entries],
        }


def power_diagonals(
    G: WeightedDigraph,
    z: float = 2.0,
    r_max: int | None = None,
    norm: str = "l1",
    gauge: bool = True,
) -> DeviationSeries:
    """Diagonal deviations of A(z)**r from A(1)**r for r = 1..r_max.

    ``r_max`` defaults to the number of vertices.  With ``gauge`` the
    network is first gauge-fixed, which leaves all diagonals unchanged but
    keeps z**w representable for real-world coordinate magnitudes.
    """
    if not z > 0 or z == 1:
        raise ValueError(f"z must be positive and different from 1, got {z!r}")
    if norm not in NORMS:
        raise ValueError(f"norm must be one of {NORMS}")
    r_max = G.n if r_max is None else r_max
    if r_max < 1:
        raise ValueError("r_max must be at least 1")
    H = gauge_fix_all(G) if gauge else G
    Az = numeric_eval(build_poly_matrix(H), z)
    A1 = adjacency(H)
    Pz, P1 = np.eye(G.n), np.eye(G.n)
    entries = []
    for r in range(1, r_max + 1):
        Pz = Pz @ Az
        P1 = P1 @ A1
        entries.append(DeviationEntry(r, tuple(float(d) for d in np.diag(Pz) - np.diag(P1))))
    return DeviationSeries(float(z), tuple(entries), norm)


def _check_budget(count: int, budget: int) -> None:
    if count > budget:
        raise TermBudgetExceeded(
            f"symbolic power needs more than {budget} terms; use the numeric path "
            "or raise LOOPWATCH_TERM_BUDGET"
        )


def symbolic_power(M: PolyMatrix, r: int, budget: int | None = None) -> PolyMatrix:
    """Exact r-th power by iterated multiplication with M."""
    if r < 0:
        raise ValueError("r must be nonnegative")
    budget = term_budget() if budget is None else budget
    rows: dict[int, list[tuple[int, ExpPoly]]] = {}
    for (i, j), p in M.entries.items():
        rows.setdefault(i, []).append((j, p))
    P: dict[tuple[int, int], ExpPoly] = {(i, i): ExpPoly.const(1.0) for i in range(M.n)}
    for _ in range(r):
        raw: dict[tuple[int, int], list] = {}
        for (u, w), left in P.items():
            for v, right in rows.get(w, ()):
                bucket = raw.setdefault((u, v), [])
                for el, cl in left.terms:
                    for er, cr in right.terms:
                        bucket.append((el.plus(er), cl * cr))
        _check_budget(sum(len(b) for b in raw.values()), budget)
        P = {}
        for key, bucket in raw.items():
            p = ExpPoly(bucket)
            if p:
                P[key] = p
    return PolyMatrix(M.vertices, P)


def walk_oracle(
    G: WeightedDigraph,
    u: str,
    v: str,
    r: int,
    suspects: Sequence[Arc | tuple[str, str]] = (),
) -> ExpPoly:
    """Sum of z**w*(p) over all r-walks from u to v, by explicit enumeration.

    Exponential in r; intended only as an independent check of
    ``symbolic_power``.
    """
    if r > 8 or G.n > 10:
        raise OracleLimitError(f"walk oracle limited to r <= 8 and n <= 10 (got r={r}, n={G.n})")
    if r < 0:
        raise ValueError("r must be nonnegative")
    variable = {frozenset(p): (i, p[0]) for i, p in enumerate(_suspect_pairs(suspects))}
    steps: dict[str, list[tuple[str, float, int | None, int]]] = {x: [] for x in G.vertices}
    for arc in G.arcs:
        var, sign = None, 0
        if arc.pair in variable:
            var, start = variable[arc.pair]
            sign = 1 if start == arc.tail else -1
        steps[arc.tail].append((arc.head, arc.weight, var, sign))
        steps[arc.head].append((arc.tail, -arc.weight, var, -sign))
    for endpoint in (u, v):
        G.index(endpoint)

    found: list[tuple[AffineExponent, float]] = []

    def walk(at: str, left: int, total: float, counts: dict[int, int]) -> None:
        if left == 0:
            if at == v:
                found.append((AffineExponent.make(total, counts), 1.0))
            return
        for nxt, w, var, sign in steps[at]:
            if var is None:
                walk(nxt, left - 1, total + w, counts)
            else:
                bumped = dict(counts)
                bumped[var] = bumped.get(var, 0) + sign
                walk(nxt, left - 1, total + w, bumped)

    walk(u, r, 0.0, {})
    return ExpPoly(found)


def diagonal_deviation_polys(G: WeightedDigraph, r: int, gauge: bool = True, budget: int | None = None) -> list[ExpPoly]:
    """Per-vertex ``(A(z)**r)[u, u] - (A(1)**r)[u, u]`` as exact polynomials in z."""
    H = gauge_fix_all(G) if gauge else G
    P = symbolic_power(build_poly_matrix(H), r, budget)
    out = []
    for p in P.diagonal():
        count = math.fsum(c for _, c in p.terms)
        out.append(p - count)
    return out


def asymptotic_diag_slope(G: WeightedDigraph, r: int, gauge: bool = True, budget: int | None = None) -> tuple[float, np.ndarray]:
    """Leading behaviour of diag(A(z)**r - A(1)**r) as z -> infinity.

    Returns the largest exponent present in any diagonal deviation and the
    per-vertex coefficients at that exponent, so that the deviation divided
    by z**e_max tends to the returned vector.
    """
    devs = diagonal_deviation_polys(G, r, gauge, budget)
    exps = [e.constant for p in devs for e, _ in p.terms]
    if not exps:
        return 0.0, np.zeros(G.n)
    e_max = max(exps)
    vec = np.zeros(G.n)
    for k, p in enumerate(devs):
        for e, c in p.terms:
            if abs(e.constant - e_max) <= 1e-9:
                vec[k] += c
    return e_max, vec
