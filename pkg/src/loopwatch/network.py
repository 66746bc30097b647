"""Per-coordinate baseline networks: ingestion, validation and gauge fixing.

A GPS campaign measures, for every baseline u -> v, the three coordinate
differences of the vector from u to v.  Each coordinate is analysed on its
own weighted digraph; the three digraphs share vertices and arcs and differ
only in their weights.
"""

from __future__ import annotations

import csv
import io
import math
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence, TextIO

from .errors import DisconnectedError, NetworkError, ParseError

COORDINATES = ("x", "y", "z")
_DELTA_COLUMNS = {"x": "dx", "y": "dy", "z": "dz"}


@dataclass(frozen=True)
class Arc:
    tail: str
    head: str
    weight: float

    def __post_init__(self) -> None:
        if not self.tail or not self.head:
            raise NetworkError("arc endpoints must be nonempty labels")
        if self.tail == self.head:
            raise NetworkError(f"self-loop at vertex {self.tail!r}")
        if not math.isfinite(self.weight):
            raise NetworkError(f"arc {self.tail}->{self.head} has non-finite weight")

    @property
    def pair(self) -> frozenset[str]:
        return frozenset((self.tail, self.head))

    def reversed(self) -> Arc:
        return Arc(self.head, self.tail, -self.weight)

    def weight_from(self, vertex: str) -> float:
        """Signed weight when the arc is traversed starting at ``vertex``."""
        if vertex == self.tail:
            return self.weight
        if vertex == self.head:
            return -self.weight
        raise NetworkError(f"vertex {vertex!r} is not an endpoint of {self}")

    def __str__(self) -> str:
        return f"{self.tail}->{self.head}({self.weight:g})"


@dataclass(frozen=True)
class WeightedDigraph:
    """Vertices in input order plus at most one weighted arc per vertex pair."""

    vertices: tuple[str, ...]
    arcs: tuple[Arc, ...]
    _index: dict[str, int] = field(init=False, repr=False, compare=False)
    _by_pair: dict[frozenset[str], int] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "vertices", tuple(self.vertices))
        object.__setattr__(self, "arcs", tuple(self.arcs))
        index: dict[str, int] = {}
        for v in self.vertices:
            if not v:
                raise NetworkError("empty vertex label")
            if v in index:
                raise NetworkError(f"duplicate vertex {v!r}")
            index[v] = len(index)
        by_pair: dict[frozenset[str], int] = {}
        for i, arc in enumerate(self.arcs):
            for end in (arc.tail, arc.head):
                if end not in index:
                    raise NetworkError(f"arc {arc} uses unknown vertex {end!r}")
            if arc.pair in by_pair:
                other = self.arcs[by_pair[arc.pair]]
                raise NetworkError(
                    f"more than one baseline between {arc.tail} and {arc.head} "
                    f"({other} and {arc})"
                )
            by_pair[arc.pair] = i
        object.__setattr__(self, "_index", index)
        object.__setattr__(self, "_by_pair", by_pair)

    @classmethod
    def from_arcs(cls, arcs: Iterable[Arc | tuple], vertices: Sequence[str] | None = None) -> WeightedDigraph:
        """Build a digraph; vertices default to order of first appearance."""
        arcs = tuple(a if isinstance(a, Arc) else Arc(str(a[0]), str(a[1]), float(a[2])) for a in arcs)
        if vertices is None:
            seen: dict[str, None] = {}
            for a in arcs:
                seen.setdefault(a.tail)
                seen.setdefault(a.head)
            vertices = tuple(seen)
        return cls(tuple(str(v) for v in vertices), arcs)

    @property
    def n(self) -> int:
        return len(self.vertices)

    @property
    def m(self) -> int:
        return len(self.arcs)

    def index(self, vertex: str) -> int:
        try:
            return self._index[vertex]
        except KeyError:
            raise NetworkError(f"unknown vertex {vertex!r}") from None

    def find_arc(self, u: str, v: str) -> Arc | None:
        """The arc joining u and v in either orientation, if any."""
        i = self._by_pair.get(frozenset((u, v)))
        return None if i is None else self.arcs[i]

    def arc_position(self, u: str, v: str) -> int:
        i = self._by_pair.get(frozenset((u, v)))
        if i is None:
            raise NetworkError(f"no baseline between {u} and {v}")
        return i

    def neighbours(self) -> dict[str, list[tuple[str, Arc]]]:
        """Underlying-graph adjacency, neighbours listed in arc input order."""
        adj: dict[str, list[tuple[str, Arc]]] = {v: [] for v in self.vertices}
        for arc in self.arcs:
            adj[arc.tail].append((arc.head, arc))
            adj[arc.head].append((arc.tail, arc))
        return adj

    def with_arcs(self, arcs: Iterable[Arc]) -> WeightedDigraph:
        return WeightedDigraph(self.vertices, tuple(arcs))

    def components(self) -> list[WeightedDigraph]:
        """Weakly connected components, each keeping input vertex and arc order."""
        adj = self.neighbours()
        label: dict[str, int] = {}
        for root in self.vertices:
            if root in label:
                continue
            comp = len(set(label.values()))
            label[root] = comp
            queue = deque([root])
            while queue:
                u = queue.popleft()
                for v, _ in adj[u]:
                    if v not in label:
                        label[v] = comp
                        queue.append(v)
        count = len(set(label.values()))
        return [
            WeightedDigraph(
                tuple(v for v in self.vertices if label[v] == c),
                tuple(a for a in self.arcs if label[a.tail] == c),
            )
            for c in range(count)
        ]

    def is_connected(self) -> bool:
        return self.n <= 1 or len(self.components()) == 1


@dataclass(frozen=True)
class GaugePotential:
    potential: dict[str, float]
    root: str


# -- ingestion -------------------------------------------------------------


@dataclass(frozen=True)
class Baseline:
    """One CSV row: the measured vector from ``tail`` to ``head``."""

    tail: str
    head: str
    deltas: dict[str, float]
    line: int = 0


@dataclass(frozen=True)
class BaselineTable:
    columns: tuple[str, ...]
    rows: tuple[Baseline, ...]

    @property
    def coordinates(self) -> tuple[str, ...]:
        """Coordinates available in the file; ``("w",)`` for single-column files."""
        return tuple(self.columns[2:])


def _as_text(source: str | TextIO) -> str:
    return source if isinstance(source, str) else source.read()


def read_baselines(source: str | TextIO) -> BaselineTable:
    """Parse the baseline CSV (``from,to,dx,dy,dz`` or ``from,to,w``)."""
    lines = _as_text(source).splitlines()
    header: list[str] | None = None
    rows: list[Baseline] = []
    for lineno, raw in enumerate(lines, start=1):
        stripped = raw.strip()
        if not stripped or stripped.startswith("#"):
            continue
        fields = [f.strip() for f in next(csv.reader([stripped]))]
        if header is None:
            header = [f.lower() for f in fields]
            if header not in (["from", "to", "dx", "dy", "dz"], ["from", "to", "w"]):
                raise ParseError(
                    "header must be 'from,to,dx,dy,dz' or 'from,to,w', got " + ",".join(fields),
                    lineno,
                )
            continue
        if len(fields) != len(header):
            raise ParseError(f"expected {len(header)} fields, got {len(fields)}", lineno)
        tail, head = fields[0], fields[1]
        if not tail or not head:
            raise ParseError("empty vertex label", lineno)
        deltas: dict[str, float] = {}
        for name, value in zip(header[2:], fields[2:]):
            try:
                deltas[name] = float(value)
            except ValueError:
                raise ParseError(f"column {name!r}: {value!r} is not a number", lineno) from None
            if not math.isfinite(deltas[name]):
                raise ParseError(f"column {name!r}: non-finite value", lineno)
        if tail == head:
            raise ParseError(f"self-loop at vertex {tail!r}", lineno)
        rows.append(Baseline(tail, head, deltas, lineno))
    if header is None:
        raise ParseError("missing header row")
    seen: dict[frozenset[str], int] = {}
    for row in rows:
        key = frozenset((row.tail, row.head))
        if key in seen:
            raise ParseError(
                f"duplicate baseline between {row.tail} and {row.head} (first on line {seen[key]})",
                row.line,
            )
        seen[key] = row.line
    return BaselineTable(tuple(header), tuple(rows))


def _column_for(table: BaselineTable, coordinate: str) -> str:
    if table.coordinates == ("w",):
        return "w"
    if coordinate not in _DELTA_COLUMNS:
        raise NetworkError(f"coordinate must be one of {COORDINATES}, got {coordinate!r}")
    return _DELTA_COLUMNS[coordinate]


def project(table: BaselineTable, coordinate: str = "x") -> WeightedDigraph:
    """The digraph of one coordinate.  Single-column tables ignore ``coordinate``."""
    column = _column_for(table, coordinate)
    return WeightedDigraph.from_arcs(Arc(r.tail, r.head, r.deltas[column]) for r in table.rows)


def load_network(source: str | TextIO, coordinate: str = "x") -> WeightedDigraph:
    return project(read_baselines(source), coordinate)


def read_network(path, coordinate: str = "x") -> WeightedDigraph:
    with open(path, encoding="utf-8") as fh:
        return load_network(fh, coordinate)


def update_table(table: BaselineTable, coordinate: str, network: WeightedDigraph) -> BaselineTable:
    """Copy ``table`` with one coordinate's values replaced by ``network``'s weights.

    Row orientation is preserved; a network arc stored in the opposite
    direction contributes its negated weight.
    """
    column = _column_for(table, coordinate)
    rows = []
    for row in table.rows:
        arc = network.find_arc(row.tail, row.head)
        if arc is None:
            rows.append(row)
            continue
        deltas = dict(row.deltas)
        deltas[column] = arc.weight_from(row.tail)
        rows.append(Baseline(row.tail, row.head, deltas, row.line))
    return BaselineTable(table.columns, tuple(rows))


def dump_baselines(table: BaselineTable) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(table.columns)
    for row in table.rows:
        writer.writerow([row.tail, row.head, *(repr(row.deltas[c]) for c in table.columns[2:])])
    return buf.getvalue()


# -- structural operations -------------------------------------------------


def normalize_orientation(G: WeightedDigraph) -> WeightedDigraph:
    """Reverse every negatively weighted arc so that all weights are >= 0."""
    return G.with_arcs(a.reversed() if a.weight < 0 else a for a in G.arcs)


def _bfs_tree(G: WeightedDigraph, root: str) -> tuple[list[Arc], dict[str, float]]:
    adj = G.neighbours()
    potential = {root: 0.0}
    tree: list[Arc] = []
    queue = deque([root])
    while queue:
        u = queue.popleft()
        for v, arc in adj[u]:
            if v not in potential:
                potential[v] = potential[u] + arc.weight_from(u)
                tree.append(arc)
                queue.append(v)
    return tree, potential


def spanning_tree(G: WeightedDigraph) -> tuple[Arc, ...]:
    """Breadth-first spanning tree of the underlying graph rooted at the first vertex."""
    if G.n == 0:
        return ()
    tree, reached = _bfs_tree(G, G.vertices[0])
    missing = tuple(v for v in G.vertices if v not in reached)
    if missing:
        raise DisconnectedError("network is not weakly connected; unreachable vertices", missing)
    return tuple(tree)


def _apply_potential(G: WeightedDigraph, tree: Iterable[Arc], potential: dict[str, float]) -> WeightedDigraph:
    tree_pairs = {a.pair for a in tree}
    arcs = []
    for a in G.arcs:
        if a.pair in tree_pairs:
            w = 0.0
        else:
            w = a.weight - (potential[a.head] - potential[a.tail])
        arcs.append(Arc(a.tail, a.head, w))
    return G.with_arcs(arcs)


def gauge_fix(G: WeightedDigraph) -> tuple[WeightedDigraph, GaugePotential]:
    """Subtract the spanning-tree potential from every arc weight.

    Tree arcs become exactly zero and every other arc carries the signed
    closure error of its fundamental cycle.  Diagonals of all powers of the
    polynomial matrix are unchanged, since the transformation is a diagonal
    similarity with entries z**potential.
    """
    if G.n == 0:
        raise DisconnectedError("empty network")
    tree = spanning_tree(G)
    _, potential = _bfs_tree(G, G.vertices[0])
    return _apply_potential(G, tree, potential), GaugePotential(potential, G.vertices[0])


def gauge_fix_all(G: WeightedDigraph) -> WeightedDigraph:
    """Gauge-fix every weakly connected component independently."""
    tree: list[Arc] = []
    potential: dict[str, float] = {}
    for comp in G.components():
        t, p = _bfs_tree(comp, comp.vertices[0])
        tree.extend(t)
        potential.update(p)
    return _apply_potential(G, tree, potential)


def adjust_arc(G: WeightedDigraph, tail: str, head: str, delta: float) -> WeightedDigraph:
    """Add ``delta`` to the weight of the baseline measured from tail to head."""
    i = G.arc_position(tail, head)
    arc = G.arcs[i]
    signed = delta if arc.tail == tail else -delta
    arcs = list(G.arcs)
    arcs[i] = Arc(arc.tail, arc.head, arc.weight + signed)
    return G.with_arcs(arcs)


def remove_arcs(G: WeightedDigraph, pairs: Iterable[tuple[str, str]]) -> WeightedDigraph:
    drop = set()
    for u, v in pairs:
        drop.add(G.arc_position(u, v))
    return G.with_arcs(a for i, a in enumerate(G.arcs) if i not in drop)
