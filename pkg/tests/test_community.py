import math
from fractions import Fraction

import numpy as np
import pytest

from communitydp.community import (EmptyGraphError, MAX_DENSITY, MIN_DENSITY,
                                   Community, assign_nodes, community_density,
                                   cut_levels, detect_communities,
                                   edge_similarity, network_density)
from communitydp.graph import HealthGraph, generate_synthetic

TRIANGLE = HealthGraph.from_edges([(1, 2), (1, 3), (2, 3)])
PATH3 = HealthGraph.from_edges([(2, 1), (1, 3)])
STAR = HealthGraph.from_edges([(0, 1), (0, 2), (0, 3), (0, 4)])
TWO_TRIANGLES = HealthGraph.from_edges(
    [(1, 2), (1, 3), (2, 3), (3, 4), (4, 5), (4, 6), (5, 6)])


# --- independent density oracle (used again by the acceptance suite) ---

def oracle_community_density(edges):
    m = len(edges)
    nodes = {u for e in edges for u in e}
    n = len(nodes)
    if n == 2:
        return 0.0
    return (m - (n - 1)) / (n * (n - 1) / 2 - (n - 1))


def oracle_network_density(edge_sets):
    total_edges = sum(len(es) for es in edge_sets)
    return sum(len(es) * oracle_community_density(es) for es in edge_sets) / total_edges


def oracle_network_density_second_form(edge_sets):
    # Equivalent closed form, only defined when every community has n > 2.
    total_edges = sum(len(es) for es in edge_sets)
    acc = 0.0
    for es in edge_sets:
        m = len(es)
        n = len({u for e in es for u in e})
        acc += m * (m - (n - 1)) / ((n - 2) * (n - 1))
    return 2.0 * acc / total_edges


def oracle_best_cut(dendrogram):
    """Re-derive the optimal cut from the merge history alone.

    Groups consecutive equal-similarity steps into rounds, replays them
    with a fresh union-find, evaluates every cut with the independent
    density oracle, and returns the earliest argmax partition.
    """
    edges = list(dendrogram.leaf_edges)
    parent = list(range(len(edges)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    def snapshot():
        groups = {}
        for i, e in enumerate(edges):
            groups.setdefault(find(i), set()).add(e)
        return [frozenset(es) for es in groups.values()]

    leaf_root = {i: i for i in range(len(edges))}  # community id -> leaf index
    best = snapshot()
    best_density = oracle_network_density(best)
    idx = 0
    next_id = len(edges)
    steps = list(dendrogram.steps)
    while idx < len(steps):
        sim = steps[idx].similarity
        while idx < len(steps) and steps[idx].similarity == sim:
            s = steps[idx]
            ri, rj = find(leaf_root.pop(s.left_id)), find(leaf_root.pop(s.right_id))
            parent[rj] = ri
            leaf_root[next_id] = ri
            next_id += 1
            idx += 1
        current = snapshot()
        density = oracle_network_density(current)
        if density > best_density:
            best, best_density = current, density
    return frozenset(best), best_density


def partition_edge_sets(partition):
    return frozenset(frozenset(c.edges) for c in partition.communities if c.edges)


# --- similarity ---

def test_similarity_triangle():
    assert edge_similarity(TRIANGLE, (1, 2), (1, 3)) == 1.0


def test_similarity_path():
    assert edge_similarity(PATH3, (1, 2), (1, 3)) == pytest.approx(1 / 3)


def test_similarity_star():
    assert edge_similarity(STAR, (0, 1), (0, 2)) == pytest.approx(1 / 3)


def test_similarity_errors():
    with pytest.raises(ValueError):
        edge_similarity(TRIANGLE, (1, 2), (1, 2))
    g = HealthGraph.from_edges([(1, 2), (3, 4)])
    with pytest.raises(ValueError):
        edge_similarity(g, (1, 2), (3, 4))


# --- community density (Eq. 2 shape) ---

@pytest.mark.parametrize("m,n,expected", [
    (1, 2, 0.0),
    (6, 4, 1.0),
    (4, 4, 1 / 3),
    (3, 3, 1.0),
    (2, 3, 0.0),
])
def test_community_density_values(m, n, expected):
    assert community_density(m, n) == pytest.approx(expected)
    # cross-check against the independent formula
    if n > 2:
        assert community_density(m, n) == pytest.approx(
            (m - (n - 1)) / (n * (n - 1) / 2 - (n - 1)))


def test_community_density_bounds():
    with pytest.raises(ValueError):
        community_density(1, 3)  # below spanning tree
    with pytest.raises(ValueError):
        community_density(7, 4)  # above clique
    with pytest.raises(ValueError):
        community_density(0, 1)


# --- detection on hand-checked graphs ---

def test_single_triangle():
    _, part = detect_communities(TRIANGLE)
    assert len(part.communities) == 1
    assert part.communities[0].density == 1.0
    assert part.network_density == 1.0


def test_two_triangles_with_bridge():
    dend, part = detect_communities(TWO_TRIANGLES)
    sets = sorted((sorted(c.edges) for c in part.communities), key=len)
    assert sets == [
        [(3, 4)],
        [(1, 2), (1, 3), (2, 3)],
        [(4, 5), (4, 6), (5, 6)],
    ]
    densities = sorted(c.density for c in part.communities)
    assert densities == [0.0, 1.0, 1.0]
    assert part.network_density == pytest.approx(6 / 7)
    # matches the exhaustive-cut oracle
    best, best_density = oracle_best_cut(dend)
    assert partition_edge_sets(part) == best
    assert part.network_density == pytest.approx(best_density)


def test_tree_partition_density_zero():
    tree = HealthGraph.from_edges([(0, 1), (1, 2), (1, 3), (3, 4)])
    _, part = detect_communities(tree)
    assert part.network_density == 0.0
    for c in part.communities:
        assert c.density == 0.0


def test_empty_graph_rejected():
    with pytest.raises(EmptyGraphError):
        detect_communities(HealthGraph.from_edges([], isolated=[1, 2]))


def test_single_edge_graph():
    _, part = detect_communities(HealthGraph.from_edges([(1, 2)]))
    assert len(part.communities) == 1
    assert part.communities[0].density == 0.0


def test_explicit_threshold_cut():
    # Cutting above every similarity keeps all edges separate.
    _, part = detect_communities(TWO_TRIANGLES, threshold=1.1)
    assert all(c.num_edges == 1 for c in part.communities)
    # Cutting at 0 merges every adjacent pair transitively.
    _, part = detect_communities(TWO_TRIANGLES, threshold=0.0)
    assert len(part.edge_communities()) == 1


def test_detection_deterministic():
    g = generate_synthetic(60, 140, seed=3)
    d1, p1 = detect_communities(g)
    d2, p2 = detect_communities(g)
    assert d1 == d2
    assert partition_edge_sets(p1) == partition_edge_sets(p2)
    assert p1.node_assignment == p2.node_assignment


def test_dendrogram_similarities_non_increasing():
    g = generate_synthetic(40, 120, seed=9)
    dend, _ = detect_communities(g)
    sims = [s.similarity for s in dend.steps]
    assert all(a >= b for a, b in zip(sims, sims[1:]))


def test_oracle_equivalence_random_graphs():
    for seed in range(20):
        g = generate_synthetic(10, 8, seed=seed)
        if g.num_edges == 0:
            continue
        dend, part = detect_communities(g)
        best, best_density = oracle_best_cut(dend)
        assert partition_edge_sets(part) == best, f"seed {seed}"
        assert part.network_density == pytest.approx(best_density)


def test_density_bounds_on_random_graphs():
    for seed in (0, 1, 2):
        g = generate_synthetic(30, 90, seed=seed)
        _, part = detect_communities(g)
        for c in part.communities:
            assert 0.0 <= c.density <= 1.0
        assert 0.0 <= part.network_density <= 1.0


def test_network_density_recompute_and_second_form():
    _, part = detect_communities(TWO_TRIANGLES)
    assert network_density(part) == pytest.approx(part.network_density)
    # clique-4 plus path-3 example
    clique4 = frozenset({(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)})
    path3 = frozenset({(7, 8), (8, 9)})
    assert oracle_network_density([clique4, path3]) == pytest.approx(0.75)
    assert oracle_network_density([clique4]) == pytest.approx(1.0)
    assert oracle_network_density_second_form([clique4]) == pytest.approx(1.0)
    # second form agrees whenever all communities have n > 2
    tri = frozenset({(1, 2), (1, 3), (2, 3)})
    assert oracle_network_density([clique4, tri]) == pytest.approx(
        oracle_network_density_second_form([clique4, tri]))


# --- node assignment ---

def _communities(*specs):
    return [Community.from_edges(cid, edges) for cid, edges in specs]


def test_assign_single_community_forced():
    comms = _communities((0, [(1, 2), (1, 3), (2, 3)]))
    assert assign_nodes(comms)[1] == 0


def test_assign_policies():
    sparse = Community.from_edges(0, [(1, 2), (2, 3)])        # density 0
    dense = Community.from_edges(1, [(1, 4), (1, 5), (4, 5)])  # density 1
    by_min = assign_nodes([sparse, dense], policy=MIN_DENSITY)
    by_max = assign_nodes([sparse, dense], policy=MAX_DENSITY)
    assert by_min[1] == 0
    assert by_max[1] == 1
    with pytest.raises(ValueError):
        assign_nodes([sparse], policy="median-density")


def test_assign_tie_breaks_to_smallest_id():
    a = Community.from_edges(4, [(1, 2), (2, 3)])
    b = Community.from_edges(9, [(1, 5), (5, 6)])
    assert assign_nodes([a, b])[1] == 4


def test_assign_isolated_nodes_get_singletons():
    comms = _communities((0, [(1, 2)]))
    mapping = assign_nodes(comms, nodes=[1, 2, 7, 8])
    assert mapping[7] == 1 and mapping[8] == 2


def test_partition_assignment_total_and_single_valued():
    g = generate_synthetic(50, 120, seed=4)
    _, part = detect_communities(g)
    assert set(part.node_assignment) == set(g.nodes)
    ids = {c.id for c in part.communities}
    assert set(part.node_assignment.values()) <= ids


def test_isolated_node_in_partition():
    g = HealthGraph.from_edges([(1, 2), (2, 3), (1, 3)], isolated=[42])
    _, part = detect_communities(g)
    cid = part.node_assignment[42]
    singleton = part.community_by_id(cid)
    assert singleton.edges == frozenset()
    assert singleton.density == 0.0


def test_partition_csv_export(tmp_path):
    _, part = detect_communities(TRIANGLE)
    out = tmp_path / "p.csv"
    part.write_csv(out)
    lines = out.read_text().strip().splitlines()
    assert len(lines) == 3
    assert lines[0].split() == ["1", "0", "1.0"]
