import pytest

from communitydp.graph import (EdgeListParseError, HealthGraph, SelfLoopError,
                               generate_synthetic, generate_synthetic_degree,
                               inclusive_neighborhood, load_edge_list,
                               write_edge_list)


def test_load_basic(tmp_path):
    path = tmp_path / "g.txt"
    path.write_text("1 2\n2 3\n")
    g = load_edge_list(path)
    assert g.num_nodes == 3
    assert g.num_edges == 2


def test_load_collapses_duplicate_direction(tmp_path):
    path = tmp_path / "g.txt"
    path.write_text("1 2\n2 1\n")
    g = load_edge_list(path)
    assert g.num_nodes == 2
    assert g.num_edges == 1


def test_load_rejects_self_loop(tmp_path):
    path = tmp_path / "g.txt"
    path.write_text("1 1\n")
    with pytest.raises(SelfLoopError) as err:
        load_edge_list(path)
    assert err.value.line == 1


def test_load_comments_isolated_and_errors(tmp_path):
    path = tmp_path / "g.txt"
    path.write_text("# a comment\n\n5\n1 2\n")
    g = load_edge_list(path)
    assert 5 in g.nodes
    assert g.adjacency[5] == ()

    bad = tmp_path / "bad.txt"
    bad.write_text("1 2\nx y\n")
    with pytest.raises(EdgeListParseError) as err:
        load_edge_list(bad)
    assert err.value.line == 2

    wide = tmp_path / "wide.txt"
    wide.write_text("1 2 3\n")
    with pytest.raises(EdgeListParseError):
        load_edge_list(wide)

    with pytest.raises(OSError):
        load_edge_list(tmp_path / "missing.txt")


def test_round_trip(tmp_path):
    g = HealthGraph.from_edges([(3, 1), (1, 2), (2, 3)], isolated=[9])
    path = tmp_path / "out.txt"
    write_edge_list(g, path)
    assert path.read_text() == "1 2\n1 3\n2 3\n9\n"
    assert load_edge_list(path) == g


def test_adjacency_symmetry():
    g = generate_synthetic(60, 150, seed=7)
    for u in g.nodes:
        for v in g.adjacency[u]:
            assert u in g.adjacency[v]
    assert sum(len(vs) for vs in g.adjacency.values()) == 2 * g.num_edges


def test_inclusive_neighborhood():
    path = HealthGraph.from_edges([(2, 1), (1, 3)])
    assert inclusive_neighborhood(path, 1) == {1, 2, 3}
    triangle = HealthGraph.from_edges([(1, 2), (2, 3), (1, 3)])
    assert inclusive_neighborhood(triangle, 2) == {1, 2, 3}
    lonely = HealthGraph.from_edges([(1, 2)], isolated=[7])
    assert inclusive_neighborhood(lonely, 7) == {7}
    with pytest.raises(KeyError):
        inclusive_neighborhood(lonely, 99)


def test_generate_synthetic_deterministic():
    a = generate_synthetic(100, 400, seed=11)
    b = generate_synthetic(100, 400, seed=11)
    assert a == b
    c = generate_synthetic(100, 400, seed=12)
    assert a != c
    assert a.num_nodes == 100 and a.num_edges == 400


def test_generate_synthetic_forced_triangle():
    g = generate_synthetic(3, 3, seed=123)
    assert sorted(g.edges) == [(0, 1), (0, 2), (1, 2)]


def test_generate_synthetic_bounds():
    with pytest.raises(ValueError):
        generate_synthetic(4, 7, seed=0)
    g = generate_synthetic_degree(1325, 2 * 5231 / 1325, seed=2)
    assert g.num_edges == 5231


def test_simple_graph_invariants():
    g = generate_synthetic(40, 300, seed=5)
    assert len(g.edges) == 300
    for a, b in g.edges:
        assert a < b
        assert a != b
