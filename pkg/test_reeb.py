"""Reeb net construction, projection, node summaries and closest members"""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from reebnet.graph import Graph, connected_components
from reebnet.lens import LInfDistance
from reebnet.merging import component_merging, node_merging
from reebnet.reeb import NodeSummary, ReebNet, build_reeb_net, closest_members, overlap_pairs, project, summarize
from reebnet.splitter import FinalSets, GtdaParams, gtda_split
from testing_oracles import edge_set, graphs, graphs_with_lens, pairwise_overlaps
from utils.exceptions import DimensionMismatchError, InvalidInputError, InvalidLabelError


def final_sets(sets, n):
    sets = [np.asarray(s, dtype=np.int64) for s in sets]
    return FinalSets(sets=sets, paths=[((0, "L"),) for _ in sets], generations=[1 for _ in sets], n=n)


def test_overlapping_sets_are_linked():
    reeb = build_reeb_net(final_sets([[0, 1, 2], [2, 3], [4]], 5))
    assert reeb.overlap_edges.tolist() == [[0, 1]]
    assert reeb.components().count == 2
    assert reeb.paths[0] == ((0, "L"),)


def test_build_rejects_empty_input():
    with pytest.raises(InvalidInputError):
        build_reeb_net(final_sets([], 3))


def test_projection_keeps_internal_edges_and_bridges(path4):
    reeb = ReebNet(
        nodes=[np.array([0, 1]), np.array([2, 3])],
        extra_edges=[[0, 1]],
        extra_bridges=[[1, 2]],
        n=4,
    )
    assert edge_set(project(reeb, path4)) == {(0, 1), (1, 2), (2, 3)}
    reeb.extra_edges = np.zeros((0, 2), dtype=np.int64)
    reeb.extra_bridges = np.zeros((0, 2), dtype=np.int64)
    assert edge_set(project(reeb, path4)) == {(0, 1), (2, 3)}


def test_projection_carries_weights():
    g = Graph.from_edges(3, [(0, 1), (1, 2)], [2.0, 3.0])
    reeb = ReebNet(nodes=[np.array([0, 1]), np.array([2])], extra_edges=[[0, 1]], extra_bridges=[[1, 2]], n=3)
    edges, weights = project(reeb, g).edge_array()
    assert edges.tolist() == [[0, 1], [1, 2]]
    assert weights.tolist() == [2.0, 3.0]


def test_projection_size_mismatch(path4):
    with pytest.raises(DimensionMismatchError):
        project(ReebNet(nodes=[np.array([0])], n=3), path4)


def test_summary_mixture_and_dominant():
    reeb = ReebNet(nodes=[np.array([0, 1, 2, 3]), np.array([4])], n=5)
    summaries = summarize(reeb, np.array([0, 0, 0, 1, 1]))
    assert summaries[0].mixture.tolist() == [0.75, 0.25]
    assert summaries[0].dominant == 0
    assert summaries[1].dominant == 1
    assert summaries[0].size == 4


def test_training_summary_flags_unlabeled_nodes():
    reeb = ReebNet(nodes=[np.array([0, 1]), np.array([2, 3])], n=4)
    summaries = summarize(reeb, np.array([1, -1, -1, -1]), mode="training", num_classes=2)
    assert summaries[0].mixture.tolist() == [0.0, 1.0]
    assert summaries[1].empty
    assert summaries[1].dominant is None


def test_summary_label_checks():
    reeb = ReebNet(nodes=[np.array([0, 1])], n=2)
    with pytest.raises(InvalidLabelError):
        summarize(reeb, np.array([0, -1]))
    with pytest.raises(InvalidLabelError):
        summarize(reeb, np.array([0, 3]), num_classes=2)
    with pytest.raises(InvalidLabelError):
        summarize(reeb, np.array([0, 1]), mode="truth")
    with pytest.raises(DimensionMismatchError):
        summarize(reeb, np.array([0]))


def test_node_summary_round_trip():
    summary = NodeSummary(size=4, mixture=np.array([0.75, 0.25]), dominant=0)
    assert NodeSummary.from_dict(summary.to_dict()).to_dict() == summary.to_dict()


def test_closest_members_shared_vertex_wins():
    g = Graph.from_edges(5, [(i, i + 1) for i in range(4)])
    reeb = build_reeb_net(final_sets([[0, 1, 2], [2, 3, 4]], 5))
    assert closest_members(reeb, project(reeb, g)) == {(0, 1): (2, 2)}


def test_closest_members_across_bridge(path4):
    reeb = ReebNet(nodes=[np.array([0, 1]), np.array([2, 3])], extra_edges=[[0, 1]], extra_bridges=[[1, 2]], n=4)
    assert closest_members(reeb, project(reeb, path4)) == {(0, 1): (1, 2)}


def test_reeb_dict_round_trip():
    reeb = ReebNet(
        nodes=[np.array([0, 1]), np.array([2, 3])],
        extra_edges=[[0, 1]],
        extra_bridges=[[1, 2]],
        excluded=[4],
        n=5,
        paths=[((0, "L"),), ((0, "R"),)],
    )
    back = ReebNet.from_dict(reeb.to_dict())
    assert back.to_dict() == reeb.to_dict()
    assert back.paths == reeb.paths


@given(st.integers(1, 20).flatmap(
    lambda n: st.tuples(st.just(n), st.lists(st.sets(st.integers(0, n - 1), min_size=1), min_size=0, max_size=10))
))
@settings(max_examples=80, deadline=None)
def test_overlap_pairs_match_pairwise_intersection(instance):
    n, sets = instance
    nodes = [np.array(sorted(s), dtype=np.int64) for s in sets]
    assert {tuple(p) for p in overlap_pairs(nodes, n).tolist()} == pairwise_overlaps(nodes)


@given(graphs(min_n=2, max_n=20), st.data())
@settings(max_examples=40, deadline=None)
def test_projection_is_subgraph_plus_bridges(g, data):
    sets = data.draw(st.lists(st.sets(st.integers(0, g.n - 1), min_size=1), min_size=1, max_size=6))
    nodes = [np.array(sorted(s), dtype=np.int64) for s in sets]
    reeb = ReebNet(nodes=nodes, overlap_edges=overlap_pairs(nodes, g.n), n=g.n)
    projected = edge_set(project(reeb, g))
    internal = {
        (u, v) for u, v in edge_set(g)
        if any(u in s and v in s for s in sets)
    }
    assert projected == internal


@given(
    graphs_with_lens(min_n=2, max_n=40),
    st.integers(min_value=1, max_value=4),
    st.integers(min_value=1, max_value=3),
    st.integers(min_value=1, max_value=6),
)
@settings(max_examples=80, deadline=None)
def test_net_components_match_projected_components(instance, s1, s2, max_size):
    g, p = instance
    dist = LInfDistance(p)
    f = gtda_split(g, p, GtdaParams(max_size=max_size, overlap=0.1))
    merged, _ = node_merging(f, g, s1=s1, dist=dist)
    final, _, _ = component_merging(merged, g, build_reeb_net(merged), s2=s2, dist=dist)

    kept = np.setdiff1d(np.arange(g.n), final.excluded)
    assert np.array_equal(final.covered(), kept)

    net_groups = []
    if final.num_nodes:
        for comp in final.components().groups():
            members = np.unique(np.concatenate([final.nodes[i] for i in comp]))
            net_groups.append(tuple(members.tolist()))
    projected_groups = [
        tuple(group.tolist()) for group in connected_components(project(final, g), restrict=kept).groups()
    ]
    assert sorted(net_groups) == sorted(projected_groups)
