import numpy as np
import pytest

from communitydp.community import MAX_DENSITY, detect_communities
from communitydp.graph import HealthGraph
from communitydp.mapping import MappingParams, map_density_to_epsilon
from communitydp.mechanisms import (COUPLED, EXPONENTIAL, INDEPENDENT, LAPLACE,
                                    SensitiveRecord)
from communitydp.pipeline import NODE_POLICY, PER_COMMUNITY, sanitize_pipeline

PARAMS = MappingParams(omega=2.0, theta=0.7, alpha=0.7)

TRIANGLE = HealthGraph.from_edges([(1, 2), (1, 3), (2, 3)])
# Two triangles joined by a bridge: at the optimal cut node 3 overlaps
# the left triangle (density 1) and the bridge pair (density 0).
OVERLAP = HealthGraph.from_edges(
    [(1, 2), (1, 3), (2, 3), (3, 4), (4, 5), (4, 6), (5, 6)])


def test_single_community_node_gets_community_epsilon():
    records = {1: SensitiveRecord(value=[5.0])}
    releases = sanitize_pipeline(TRIANGLE, records, PARAMS, seed=0)
    assert len(releases) == 1
    rel = releases[0]
    assert rel.mechanism == LAPLACE
    assert rel.epsilon == pytest.approx(map_density_to_epsilon(1.0, PARAMS))
    assert rel.releaser == 1


def test_overlapped_node_uses_min_density_by_default():
    # Node 3 sits in the triangle (density 1) and the bridge pair
    # (density 0); the default policy prices all its releases at the
    # sparse community's level.
    records = {3: SensitiveRecord(value=[0.0])}
    releases = sanitize_pipeline(OVERLAP, records, PARAMS, seed=1)
    assert len(releases) == 2
    floor = PARAMS.epsilon_floor
    assert all(r.epsilon == pytest.approx(floor) for r in releases)


def test_overlapped_node_max_density_policy():
    records = {3: SensitiveRecord(value=[0.0])}
    releases = sanitize_pipeline(OVERLAP, records, PARAMS, policy=MAX_DENSITY,
                                 seed=1)
    expected = map_density_to_epsilon(1.0, PARAMS)
    assert all(r.epsilon == pytest.approx(expected) for r in releases)


def test_per_community_mode_prices_each_release():
    records = {3: SensitiveRecord(value=[0.0])}
    releases = sanitize_pipeline(OVERLAP, records, PARAMS, seed=1,
                                 epsilon_mode=PER_COMMUNITY)
    eps = sorted(r.epsilon for r in releases)
    assert eps[0] == pytest.approx(PARAMS.epsilon_floor)
    assert eps[1] == pytest.approx(map_density_to_epsilon(1.0, PARAMS))


def test_coupled_equal_epsilon_releases_identical():
    records = {3: SensitiveRecord(value=[7.0])}
    releases = sanitize_pipeline(OVERLAP, records, PARAMS, seed=2,
                                 noise_source=COUPLED)
    assert np.array_equal(releases[0].payload, releases[1].payload)
    assert all(r.noise_source == COUPLED for r in releases)


def test_independent_noise_differs_across_releases():
    records = {3: SensitiveRecord(value=[7.0])}
    releases = sanitize_pipeline(OVERLAP, records, PARAMS, seed=2,
                                 noise_source=INDEPENDENT)
    assert not np.array_equal(releases[0].payload, releases[1].payload)


def test_categorical_record_uses_exponential_mechanism():
    records = {1: SensitiveRecord(value="flu", candidates=("flu", "cold", "ok"))}
    releases = sanitize_pipeline(TRIANGLE, records, PARAMS, seed=3)
    assert releases[0].mechanism == EXPONENTIAL
    assert releases[0].payload in ("flu", "cold", "ok")


def test_pipeline_pure_function_of_seed():
    records = {1: SensitiveRecord(value=[1.0]), 3: SensitiveRecord(value=[2.0])}
    a = sanitize_pipeline(OVERLAP, records, PARAMS, seed=9)
    b = sanitize_pipeline(OVERLAP, records, PARAMS, seed=9)
    c = sanitize_pipeline(OVERLAP, records, PARAMS, seed=10)
    for x, y in zip(a, b):
        assert x.community_id == y.community_id
        assert np.array_equal(x.payload, y.payload)
    assert any(not np.array_equal(x.payload, y.payload) for x, y in zip(a, c))


def test_one_release_per_record_community_pair():
    records = {u: SensitiveRecord(value=[float(u)]) for u in (1, 3, 5)}
    releases = sanitize_pipeline(OVERLAP, records, PARAMS, seed=4)
    _, part = detect_communities(OVERLAP)
    for node in records:
        expected = {c.id for c in part.communities if node in c.nodes}
        got = {r.community_id for r in releases if r.releaser == node}
        assert got == expected


def test_unknown_node_rejected():
    records = {77: SensitiveRecord(value=[0.0])}
    with pytest.raises(KeyError):
        sanitize_pipeline(TRIANGLE, records, PARAMS, seed=0)
    with pytest.raises(ValueError):
        sanitize_pipeline(TRIANGLE, {}, PARAMS, seed=0)


def test_isolated_releaser_gets_floor_epsilon():
    g = HealthGraph.from_edges([(1, 2), (1, 3), (2, 3)], isolated=[9])
    records = {9: SensitiveRecord(value=[0.0])}
    releases = sanitize_pipeline(g, records, PARAMS, seed=5)
    assert len(releases) == 1
    assert releases[0].epsilon == pytest.approx(PARAMS.epsilon_floor)
