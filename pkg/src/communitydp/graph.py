"""Undirected graph model, edge-list I/O, and synthetic graph generation."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, FrozenSet, Iterable, Optional, Sequence, Set, Tuple

import numpy as np

Edge = Tuple[int, int]


class EdgeListParseError(ValueError):
    """Malformed edge-list line; carries the 1-based line number."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class SelfLoopError(EdgeListParseError):
    pass


def canonical_edge(a: int, b: int) -> Edge:
    """Return the undirected edge as an ordered (min, max) pair."""
    if a == b:
        raise ValueError(f"self-loop on node {a}")
    return (a, b) if a < b else (b, a)


@dataclass(frozen=True)
class HealthGraph:
    """Immutable undirected simple graph over integer node ids.

    Nodes may be isolated (declared without edges). The adjacency map is
    symmetric and holds sorted neighbor tuples; it is derived from the edge
    set at construction and must not be mutated.
    """

    nodes: FrozenSet[int]
    edges: FrozenSet[Edge]
    adjacency: Dict[int, Tuple[int, ...]] = field(compare=False, repr=False)

    @classmethod
    def from_edges(cls, edges: Iterable[Tuple[int, int]], isolated: Iterable[int] = ()) -> "HealthGraph":
        canon: Set[Edge] = set()
        for a, b in edges:
            if a < 0 or b < 0:
                raise ValueError(f"negative node id in edge ({a}, {b})")
            canon.add(canonical_edge(a, b))
        nodes: Set[int] = set()
        adj: Dict[int, Set[int]] = {}
        for a, b in canon:
            nodes.update((a, b))
            adj.setdefault(a, set()).add(b)
            adj.setdefault(b, set()).add(a)
        for u in isolated:
            if u < 0:
                raise ValueError(f"negative node id {u}")
            nodes.add(u)
            adj.setdefault(u, set())
        adjacency = {u: tuple(sorted(vs)) for u, vs in adj.items()}
        return cls(nodes=frozenset(nodes), edges=frozenset(canon), adjacency=adjacency)

    @property
    def num_nodes(self) -> int:
        return len(self.nodes)

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def neighbors(self, u: int) -> Tuple[int, ...]:
        if u not in self.nodes:
            raise KeyError(f"unknown node {u}")
        return self.adjacency[u]

    def degree(self, u: int) -> int:
        return len(self.neighbors(u))

    def sorted_edges(self) -> list:
        return sorted(self.edges)


def inclusive_neighborhood(g: HealthGraph, u: int) -> Set[int]:
    """Node u together with all of its adjacent neighbors."""
    return {u, *g.neighbors(u)}


def load_edge_list(path) -> HealthGraph:
    """Parse a whitespace-separated edge list.

    Lines starting with '#' and blank lines are skipped. A line with a
    single token declares an isolated node; two tokens declare an
    undirected edge (duplicates collapse). Self-loops are rejected.
    """
    edges = []
    isolated = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            tokens = line.split()
            try:
                values = [int(t) for t in tokens]
            except ValueError:
                raise EdgeListParseError(f"non-integer token in {line!r}", lineno) from None
            if any(v < 0 for v in values):
                raise EdgeListParseError(f"negative node id in {line!r}", lineno)
            if len(values) == 1:
                isolated.append(values[0])
            elif len(values) == 2:
                if values[0] == values[1]:
                    raise SelfLoopError(f"self-loop on node {values[0]}", lineno)
                edges.append((values[0], values[1]))
            else:
                raise EdgeListParseError(f"expected 1 or 2 tokens, got {len(values)}", lineno)
    return HealthGraph.from_edges(edges, isolated=isolated)


def write_edge_list(g: HealthGraph, path) -> None:
    """Canonical writer: one "a b" line per edge with a < b, sorted by (a, b).

    Isolated nodes are emitted as single-token lines so that
    load_edge_list(write_edge_list(g)) round-trips exactly.
    """
    covered = {u for e in g.edges for u in e}
    with open(path, "w", encoding="utf-8") as fh:
        for a, b in g.sorted_edges():
            fh.write(f"{a} {b}\n")
        for u in sorted(g.nodes - covered):
            fh.write(f"{u}\n")


def _index_to_pair(idx: np.ndarray, n: int) -> Tuple[np.ndarray, np.ndarray]:
    # Decode linear indices over the upper triangle of an n x n grid:
    # idx = a*n - a*(a+1)/2 + (b - a - 1) for a < b.
    a = (n - 0.5 - np.sqrt((n - 0.5) ** 2 - 2.0 * idx)).astype(np.int64)
    # Guard against float rounding at block boundaries.
    base = a * n - a * (a + 1) // 2
    a = np.where(base > idx, a - 1, a)
    base = a * n - a * (a + 1) // 2
    b = idx - base + a + 1
    return a, b


def generate_synthetic(n: int, m: int, seed: int) -> HealthGraph:
    """Uniform random simple graph with exactly n nodes and m edges.

    Pure function of (n, m, seed): the same inputs always produce the same
    graph. Nodes are labeled 0..n-1; nodes that end up with no incident
    edge are kept as isolated nodes.
    """
    if n < 1:
        raise ValueError("need at least one node")
    max_edges = n * (n - 1) // 2
    if m > max_edges:
        raise ValueError(f"m={m} exceeds the {max_edges} possible edges on {n} nodes")
    rng = np.random.default_rng(seed)
    chosen: Set[int] = set()
    while len(chosen) < m:
        draw = rng.integers(0, max_edges, size=m - len(chosen))
        chosen.update(int(v) for v in draw)
    idx = np.fromiter(sorted(chosen), dtype=np.int64, count=m)
    a, b = _index_to_pair(idx, n)
    edges = list(zip(a.tolist(), b.tolist()))
    return HealthGraph.from_edges(edges, isolated=range(n))


def generate_synthetic_degree(n: int, avg_degree: float, seed: int) -> HealthGraph:
    """G(n, m) graph with m chosen to match a target average degree 2m/n."""
    m = int(round(avg_degree * n / 2.0))
    return generate_synthetic(n, m, seed)
