"""Edge-pair link community detection with a partition-density-optimal cut.

Communities are sets of edges built by hierarchical merging of adjacent
edge pairs in descending similarity order. Pairs with equal similarity
merge in the same round, so the dendrogram can only be cut between
rounds. The default cut maximizes the network partition density; an
explicit similarity threshold may be supplied instead.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Set, Tuple

from .graph import Edge, HealthGraph, canonical_edge, inclusive_neighborhood

MIN_DENSITY = "min-density"
MAX_DENSITY = "max-density"


class EmptyGraphError(ValueError):
    pass


def edge_similarity(g: HealthGraph, e1: Tuple[int, int], e2: Tuple[int, int]) -> float:
    """Jaccard similarity of the inclusive neighborhoods of the two
    endpoints not shared by the adjacent edge pair."""
    e1 = canonical_edge(*e1)
    e2 = canonical_edge(*e2)
    if e1 == e2:
        raise ValueError("edge pair must be two distinct edges")
    shared = set(e1) & set(e2)
    if not shared:
        raise ValueError(f"edges {e1} and {e2} share no endpoint")
    (j,) = set(e1) - shared
    (k,) = set(e2) - shared
    nj = inclusive_neighborhood(g, j)
    nk = inclusive_neighborhood(g, k)
    return len(nj & nk) / len(nj | nk)


def community_density(m_c: int, n_c: int) -> float:
    """Normalized edge density of a connected community.

    Linear rescaling of the edge count between the spanning-tree minimum
    n_c - 1 and the clique maximum n_c(n_c - 1)/2; defined as 0 for
    two-node communities where those bounds coincide.
    """
    if n_c < 2:
        raise ValueError("community needs at least two nodes")
    lo = n_c - 1
    hi = n_c * (n_c - 1) // 2
    if m_c < lo or m_c > hi:
        raise ValueError(f"{m_c} edges on {n_c} nodes is not a connected simple graph")
    if n_c == 2:
        return 0.0
    return (m_c - lo) / (hi - lo)


@dataclass(frozen=True)
class Community:
    """A detected community: an edge set plus its induced nodes.

    Isolated nodes are represented as zero-edge singletons with density 0.
    """

    id: int
    edges: FrozenSet[Edge]
    nodes: FrozenSet[int]
    density: float

    @classmethod
    def from_edges(cls, cid: int, edges: Iterable[Edge]) -> "Community":
        edges = frozenset(edges)
        nodes = frozenset(u for e in edges for u in e)
        return cls(id=cid, edges=edges, nodes=nodes,
                   density=community_density(len(edges), len(nodes)))

    @classmethod
    def singleton(cls, cid: int, node: int) -> "Community":
        return cls(id=cid, edges=frozenset(), nodes=frozenset({node}), density=0.0)

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    @property
    def num_nodes(self) -> int:
        return len(self.nodes)


@dataclass(frozen=True)
class MergeStep:
    step: int
    left_id: int
    right_id: int
    similarity: float


@dataclass(frozen=True)
class Dendrogram:
    """Merge history: one leaf per edge, one step per community union."""

    leaf_edges: Tuple[Edge, ...]
    steps: Tuple[MergeStep, ...]

    @property
    def num_leaves(self) -> int:
        return len(self.leaf_edges)

    def write_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["step", "left_id", "right_id", "similarity"])
            for s in self.steps:
                writer.writerow([s.step, s.left_id, s.right_id, repr(s.similarity)])


@dataclass(frozen=True)
class CommunityPartition:
    communities: Tuple[Community, ...]
    node_assignment: Dict[int, int] = field(compare=False)
    network_density: float = 0.0
    threshold_used: float = float("inf")

    def community_by_id(self, cid: int) -> Community:
        for c in self.communities:
            if c.id == cid:
                return c
        raise KeyError(f"no community with id {cid}")

    def edge_communities(self) -> Tuple[Community, ...]:
        return tuple(c for c in self.communities if c.edges)

    def write_csv(self, path) -> None:
        """Export "node_id community_id density" rows, one per node."""
        densities = {c.id: c.density for c in self.communities}
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, delimiter=" ")
            for node in sorted(self.node_assignment):
                cid = self.node_assignment[node]
                writer.writerow([node, cid, repr(densities[cid])])


def network_density(p: CommunityPartition) -> float:
    """Edge-weighted mean of community densities over the whole partition."""
    return _weighted_density(
        [(c.num_edges, c.num_nodes) for c in p.communities if c.edges])


def _weighted_density(sizes: Sequence[Tuple[int, int]]) -> float:
    total_edges = sum(m for m, _ in sizes)
    if total_edges == 0:
        raise ValueError("partition has no edges")
    return sum(m * community_density(m, n) for m, n in sizes) / total_edges


class _EdgeDSU:
    """Union-find over edge indices tracking per-root edge and node counts."""

    def __init__(self, edges: Sequence[Edge]):
        self.parent = list(range(len(edges)))
        self.edge_count = [1] * len(edges)
        self.node_sets: List[Optional[Set[int]]] = [set(e) for e in edges]
        self.community_id = list(range(len(edges)))

    def find(self, i: int) -> int:
        root = i
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[i] != root:
            self.parent[i], i = root, self.parent[i]
        return root

    def union(self, i: int, j: int, new_id: int) -> Tuple[int, int]:
        """Merge the two roots; returns their old community ids."""
        ri, rj = self.find(i), self.find(j)
        if ri == rj:
            raise ValueError("already merged")
        if len(self.node_sets[ri]) < len(self.node_sets[rj]):
            ri, rj = rj, ri
        left, right = self.community_id[ri], self.community_id[rj]
        self.parent[rj] = ri
        self.edge_count[ri] += self.edge_count[rj]
        self.node_sets[ri].update(self.node_sets[rj])
        self.node_sets[rj] = None
        self.community_id[ri] = new_id
        return left, right


def _adjacent_pairs(g: HealthGraph, edge_index: Dict[Edge, int]):
    """All unordered pairs of distinct edges sharing exactly one node,
    with the pair similarity as an exact fraction."""
    incl = {u: inclusive_neighborhood(g, u) for u in g.nodes}
    pairs = []
    for u in g.nodes:
        incident = [canonical_edge(u, v) for v in g.adjacency[u]]
        for x in range(len(incident)):
            for y in range(x + 1, len(incident)):
                e1, e2 = incident[x], incident[y]
                if e2 < e1:
                    e1, e2 = e2, e1
                j = e1[0] if e1[1] == u else e1[1]
                k = e2[0] if e2[1] == u else e2[1]
                inter = len(incl[j] & incl[k])
                union = len(incl[j] | incl[k])
                pairs.append((Fraction(inter, union), edge_index[e1], edge_index[e2], e1, e2))
    return pairs


def _merge_rounds(g: HealthGraph):
    """Run the full merge process.

    Yields the dendrogram pieces and, per similarity round, the partition
    density reached once every pair at that similarity has merged.
    """
    edges = g.sorted_edges()
    if not edges:
        raise EmptyGraphError("graph has no edges")
    edge_index = {e: i for i, e in enumerate(edges)}
    pairs = _adjacent_pairs(g, edge_index)
    # Group by similarity (descending); process pairs of a round in
    # lexicographic edge order for a deterministic dendrogram.
    by_similarity: Dict[Fraction, list] = {}
    for sim, i, j, e1, e2 in pairs:
        by_similarity.setdefault(sim, []).append((e1, e2, i, j))

    dsu = _EdgeDSU(edges)
    steps: List[MergeStep] = []
    next_id = len(edges)
    # Incremental network density: track sum of m_c * D_c over communities.
    weighted = 0.0
    m_total = len(edges)
    levels = [(float("inf"), 0.0, 0)]  # (cut threshold, density, merge count)

    def term(root: int) -> float:
        m_c = dsu.edge_count[root]
        n_c = len(dsu.node_sets[root])
        return m_c * community_density(m_c, n_c)

    for sim in sorted(by_similarity, reverse=True):
        for e1, e2, i, j in sorted(by_similarity[sim]):
            ri, rj = dsu.find(i), dsu.find(j)
            if ri == rj:
                continue
            weighted -= term(ri) + term(rj)
            left, right = dsu.union(i, j, next_id)
            weighted += term(dsu.find(i))
            steps.append(MergeStep(len(steps), left, right, float(sim)))
            next_id += 1
        levels.append((float(sim), weighted / m_total, len(steps)))

    return edges, steps, levels


def _build_partition(g: HealthGraph, groups: Dict[int, List[Edge]],
                     density: float, threshold: float, policy: str) -> CommunityPartition:
    members = sorted(groups.values(), key=lambda es: min(es))
    communities = [Community.from_edges(cid, es) for cid, es in enumerate(members)]
    isolated = sorted(g.nodes - {u for e in g.edges for u in e})
    for node in isolated:
        communities.append(Community.singleton(len(communities), node))
    assignment = assign_nodes(communities, policy=policy)
    return CommunityPartition(
        communities=tuple(communities),
        node_assignment=assignment,
        network_density=density,
        threshold_used=threshold,
    )


def detect_communities(
    g: HealthGraph,
    threshold: Optional[float] = None,
    policy: str = MIN_DENSITY,
) -> Tuple[Dendrogram, CommunityPartition]:
    """Detect link communities and cut the dendrogram.

    With threshold=None the cut maximizing the network partition density
    is selected (earliest round on ties, i.e. the finest such partition).
    An explicit threshold keeps every merge with similarity >= threshold.
    """
    edges, steps, levels = _merge_rounds(g)
    dendrogram = Dendrogram(leaf_edges=tuple(edges), steps=tuple(steps))

    if threshold is None:
        cut_threshold, density, n_merges = max(levels, key=lambda lv: lv[1])
    else:
        kept = [lv for lv in levels if lv[0] >= threshold]
        cut_threshold, density, n_merges = kept[-1]
        cut_threshold = float(threshold)

    groups = _replay_groups(edges, steps[:n_merges])
    partition = _build_partition(g, groups, density, cut_threshold, policy)
    return dendrogram, partition


def _replay_groups(edges: Sequence[Edge], steps: Sequence[MergeStep]) -> Dict[int, List[Edge]]:
    """Rebuild edge groups after applying the first merge steps."""
    parent = list(range(len(edges)))
    current: Dict[int, int] = {i: i for i in range(len(edges))}  # community id -> root

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    next_id = len(edges)
    for s in steps:
        ri, rj = find(current.pop(s.left_id)), find(current.pop(s.right_id))
        parent[rj] = ri
        current[next_id] = ri
        next_id += 1

    groups: Dict[int, List[Edge]] = {}
    for i, e in enumerate(edges):
        groups.setdefault(find(i), []).append(e)
    return {root: sorted(es) for root, es in groups.items()}


def cut_levels(g: HealthGraph) -> List[Tuple[float, float, "CommunityPartition"]]:
    """Every admissible dendrogram cut with its partition density.

    Returns (threshold, density, partition) triples ordered from the
    no-merge partition down to the fully merged one. Exposed for
    threshold exploration and cross-checking the optimal cut.
    """
    edges, steps, levels = _merge_rounds(g)
    out = []
    for cut_threshold, density, n_merges in levels:
        groups = _replay_groups(edges, steps[:n_merges])
        out.append((cut_threshold, density,
                    _build_partition(g, groups, density, cut_threshold, MIN_DENSITY)))
    return out


def assign_nodes(
    communities: Sequence[Community],
    policy: str = MIN_DENSITY,
    nodes: Optional[Iterable[int]] = None,
) -> Dict[int, int]:
    """Map every node to exactly one of its incident communities.

    policy "min-density" picks the sparsest incident community (most
    conservative privacy level downstream); "max-density" the densest.
    Ties break toward the smallest community id. Nodes covered by no
    community (isolated) receive fresh singleton ids after the largest
    existing id, in sorted node order.
    """
    if policy not in (MIN_DENSITY, MAX_DENSITY):
        raise ValueError(f"unknown policy {policy!r}")
    incident: Dict[int, List[Community]] = {}
    for c in communities:
        for u in c.nodes:
            incident.setdefault(u, []).append(c)
    assignment: Dict[int, int] = {}
    for u, cands in incident.items():
        if policy == MIN_DENSITY:
            best = min(cands, key=lambda c: (c.density, c.id))
        else:
            best = max(cands, key=lambda c: (c.density, -c.id))
        assignment[u] = best.id
    if nodes is not None:
        uncovered = sorted(set(nodes) - set(assignment))
        next_id = max((c.id for c in communities), default=-1) + 1
        for u in uncovered:
            assignment[u] = next_id
            next_id += 1
    return assignment
