"""Node and component merging"""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from reebnet.graph import Graph
from reebnet.lens import LInfDistance, LensMatrix
from reebnet.merging import (
    boundary_edges,
    cheapest_edge,
    component_merging,
    node_merging,
    smallest_owner,
)
from reebnet.reeb import ReebNet, build_reeb_net
from reebnet.splitter import FinalSets, GtdaParams, gtda_split
from testing_oracles import graphs_with_lens, is_connected_set
from utils.exceptions import InvalidParameterError


def final_sets(sets, n):
    sets = [np.asarray(s, dtype=np.int64) for s in sets]
    return FinalSets(sets=sets, paths=[() for _ in sets], generations=[0 for _ in sets], n=n)


def linf(values):
    return LInfDistance(LensMatrix(values=np.asarray(values, dtype=np.float64).reshape(-1, 1)))


def test_boundary_edges_leave_the_set(path4):
    u, v = boundary_edges(path4, np.array([1, 2]))
    assert sorted(zip(u.tolist(), v.tolist())) == [(1, 0), (2, 3)]


def test_cheapest_edge_breaks_ties_by_endpoint():
    g = Graph.from_edges(3, [(0, 1), (1, 2)])
    dist = linf([0.0, 0.5, 1.0])
    assert cheapest_edge(g, np.array([1]), dist) == (1, 0, 0.5)
    assert cheapest_edge(g, np.array([0, 1, 2]), dist) is None


def test_smallest_owner_prefers_small_then_low_index():
    owner = smallest_owner([np.array([0, 1, 2]), np.array([2, 3]), np.array([3, 4])], 6)
    assert owner.tolist() == [0, 0, 1, 1, 2, -1]


def test_small_set_joins_its_closest_neighbor(two_cliques):
    f = final_sets([range(0, 5), [5], range(6, 12)], 12)
    dist = linf([0.0] * 5 + [0.6] + [1.0] * 6)
    merged, trace = node_merging(f, two_cliques, s1=1, dist=dist)

    assert [s.tolist() for s in merged.sets] == [[0, 1, 2, 3, 4], [5, 6, 7, 8, 9, 10, 11]]
    assert trace.num_rounds == 1
    decision = trace.decisions[0]
    assert (decision.source, decision.target, decision.u, decision.v) == (1, 2, 5, 6)
    assert decision.distance == pytest.approx(0.4)


def test_small_sets_chain_into_one():
    g = Graph.from_edges(3, [(0, 1), (1, 2)])
    merged, trace = node_merging(final_sets([[0], [1], [2]], 3), g, s1=1, dist=linf([0.0, 0.5, 1.0]))
    assert [s.tolist() for s in merged.sets] == [[0, 1, 2]]
    assert len(trace.decisions) == 3


def test_isolated_small_set_is_flagged():
    g = Graph.from_edges(4, [(0, 1), (1, 2)])
    merged, trace = node_merging(final_sets([[0, 1, 2], [3]], 4), g, s1=1, dist=linf([0, 0, 0, 0]))
    assert [s.tolist() for s in merged.sets] == [[0, 1, 2], [3]]
    assert merged.unmergeable == [1]
    assert trace.flagged == [1]


def test_node_merging_rejects_bad_threshold(path4):
    with pytest.raises(InvalidParameterError):
        node_merging(final_sets([[0, 1, 2, 3]], 4), path4, s1=0, dist=linf([0, 0, 0, 0]))


def test_component_merging_links_small_component():
    # vertices 0-2 and 3-5 form separate Reeb components joined by g-edge (2, 3)
    g = Graph.from_edges(6, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5)])
    reeb = ReebNet(nodes=[np.array([0, 1, 2]), np.array([3, 4, 5])], n=6)
    final, extra, trace = component_merging(
        final_sets(reeb.nodes, 6), g, reeb, s2=1, dist=linf(np.linspace(0, 1, 6))
    )
    assert extra.tolist() == [[0, 1]]
    assert final.extra_bridges.tolist() == [[2, 3]]
    assert final.components().count == 1
    assert final.excluded.size == 0
    assert trace.num_rounds == 1


def test_component_without_leaving_edge_is_dropped():
    g = Graph.from_edges(7, [(0, 1), (1, 2), (3, 4), (4, 5)])
    nodes = [np.array([0, 1]), np.array([1, 2]), np.array([3, 4, 5]), np.array([6])]
    reeb = build_reeb_net(final_sets(nodes, 7))
    final, extra, trace = component_merging(final_sets(nodes, 7), g, reeb, s2=1, dist=linf(np.zeros(7)))

    # the two single-node components are isolated in g and get excluded
    assert [s.tolist() for s in final.nodes] == [[0, 1], [1, 2]]
    assert final.excluded.tolist() == [3, 4, 5, 6]
    assert final.overlap_edges.tolist() == [[0, 1]]
    assert extra.shape == (0, 2)
    assert len(trace.flagged) == 2


def test_component_merging_rejects_bad_threshold(path4):
    reeb = ReebNet(nodes=[np.arange(4)], n=4)
    with pytest.raises(InvalidParameterError):
        component_merging(final_sets(reeb.nodes, 4), path4, reeb, s2=0, dist=linf([0, 0, 0, 0]))


@given(graphs_with_lens(min_n=2, max_n=30), st.integers(min_value=1, max_value=4))
@settings(max_examples=60, deadline=None)
def test_node_merging_leaves_no_small_mergeable_set(instance, s1):
    g, p = instance
    f = gtda_split(g, p, GtdaParams(max_size=2, overlap=0.1))
    merged, _ = node_merging(f, g, s1=s1, dist=LInfDistance(p))

    assert np.array_equal(np.unique(np.concatenate(merged.sets)), np.arange(g.n))
    for i, s in enumerate(merged.sets):
        assert s.size > s1 or i in merged.unmergeable
        assert is_connected_set(g, s)


@given(graphs_with_lens(min_n=2, max_n=30), st.integers(min_value=1, max_value=3))
@settings(max_examples=60, deadline=None)
def test_component_merging_leaves_no_small_component(instance, s2):
    g, p = instance
    dist = LInfDistance(p)
    f = gtda_split(g, p, GtdaParams(max_size=2, overlap=0.1))
    merged, _ = node_merging(f, g, s1=1, dist=dist)
    reeb = build_reeb_net(merged)
    final, extra, _ = component_merging(merged, g, reeb, s2=s2, dist=dist)

    # components that still hold at most s2 nodes can only be whole g-components
    for comp in final.components().groups():
        if comp.size <= s2:
            members = np.unique(np.concatenate([final.nodes[i] for i in comp]))
            u, _ = boundary_edges(g, members)
            assert u.size == 0
    covered = final.covered()
    assert np.intersect1d(covered, final.excluded).size == 0
    for (i, j), (u, v) in zip(extra.tolist(), final.extra_bridges.tolist()):
        assert i < j
        assert u in final.nodes[i] and v in final.nodes[j]
