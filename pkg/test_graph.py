"""Graph construction, components, subgraphs, unions and edge-list IO"""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from reebnet.graph import (
    Graph,
    as_vertex_set,
    connected_components,
    degrees,
    induced_subgraph,
    read_edge_list,
    transition_matrix,
    union_graphs,
    write_edge_list,
)
from testing_oracles import bfs_components, dense_walk, edge_set, graphs, random_graph
from utils.exceptions import (
    DimensionMismatchError,
    InputFileNotFoundError,
    InputFormatError,
    InvalidGraphError,
    InvalidInputError,
)


def test_from_edges_stores_both_directions(path4):
    assert path4.n == 4
    assert path4.num_edges == 3
    assert list(path4.neighbors(1)) == [0, 2]
    assert edge_set(path4) == {(0, 1), (1, 2), (2, 3)}
    assert not path4.is_weighted


@pytest.mark.parametrize("edges", [
    [(0, 0)],
    [(0, 1), (1, 0)],
    [(0, 4)],
    [(-1, 2)],
])
def test_from_edges_rejects_bad_edges(edges):
    with pytest.raises(InvalidGraphError):
        Graph.from_edges(4, edges)


def test_from_edges_rejects_negative_weights():
    with pytest.raises(InvalidGraphError):
        Graph.from_edges(3, [(0, 1), (1, 2)], [1.0, -0.5])


def test_from_edges_rejects_weight_count_mismatch():
    with pytest.raises(InvalidGraphError):
        Graph.from_edges(3, [(0, 1), (1, 2)], [1.0])


def test_from_pairs_collapses_duplicates_to_max_weight():
    g = Graph.from_pairs(3, np.array([0, 1, 1, 2]), np.array([1, 0, 1, 0]), np.array([1.0, 3.0, 9.0, 2.0]))
    edges, weights = g.edge_array()
    assert edges.tolist() == [[0, 1], [0, 2]]
    assert weights.tolist() == [3.0, 2.0]


def test_isolated_vertices_have_zero_degree_and_identity_walk():
    g = Graph.from_edges(4, [(0, 1)])
    assert degrees(g).tolist() == [1.0, 1.0, 0.0, 0.0]
    walk = transition_matrix(g).toarray()
    assert walk[2].tolist() == [0.0, 0.0, 1.0, 0.0]
    assert walk[0].tolist() == [0.0, 1.0, 0.0, 0.0]


def test_components_are_ordered_by_smallest_vertex():
    g = Graph.from_edges(6, [(4, 5), (1, 3)])
    labeling = connected_components(g)
    assert labeling.count == 4
    assert [grp.tolist() for grp in labeling.groups()] == [[0], [1, 3], [2], [4, 5]]


def test_restricted_components_ignore_outside_edges(path4):
    labeling = connected_components(path4, np.array([0, 1, 3]))
    assert [grp.tolist() for grp in labeling.groups()] == [[0, 1], [3]]


def test_components_on_empty_restriction(path4):
    labeling = connected_components(path4, np.zeros(0, dtype=np.int64))
    assert labeling.count == 0
    assert labeling.groups() == []


def test_long_path_components_do_not_recurse():
    n = 200_000
    g = Graph.from_pairs(n, np.arange(n - 1), np.arange(1, n))
    assert connected_components(g).count == 1


def test_induced_subgraph_maps_ids(two_cliques):
    sub = induced_subgraph(two_cliques, np.array([4, 5, 6, 7]))
    assert sub.vertices.tolist() == [4, 5, 6, 7]
    assert edge_set(sub.graph) == {(0, 1), (1, 2), (2, 3)}
    assert sub.local_ids(np.array([6, 4])).tolist() == [2, 0]
    with pytest.raises(InvalidInputError):
        sub.local_ids(np.array([0]))


def test_union_graphs_keeps_larger_weight():
    g1 = Graph.from_edges(3, [(0, 1)], [0.5])
    g2 = Graph.from_edges(3, [(0, 1), (1, 2)])
    union = union_graphs(g1, g2)
    edges, weights = union.edge_array()
    assert edges.tolist() == [[0, 1], [1, 2]]
    assert weights.tolist() == [1.0, 1.0]


def test_union_graphs_size_mismatch():
    with pytest.raises(DimensionMismatchError):
        union_graphs(Graph.from_edges(2, []), Graph.from_edges(3, []))


def test_as_vertex_set_sorts_and_checks_range():
    assert as_vertex_set([3, 1, 3], 4).tolist() == [1, 3]
    with pytest.raises(InvalidInputError):
        as_vertex_set([0, 4], 4)


def test_edge_list_round_trip_keeps_isolated_tail(tmp_path):
    g = Graph.from_edges(6, [(0, 1), (2, 3)], [1.5, 2.0])
    path = tmp_path / "edges.txt"
    write_edge_list(g, path)
    back = read_edge_list(path)
    assert back.n == 6
    assert edge_set(back) == edge_set(g)
    assert back.edge_array()[1].tolist() == [1.5, 2.0]


def test_read_edge_list_formats(tmp_path):
    path = tmp_path / "edges.csv"
    path.write_text("# a comment\n0,1\n1 2\n\n")
    g = read_edge_list(path, n=5)
    assert g.n == 5
    assert edge_set(g) == {(0, 1), (1, 2)}


def test_read_edge_list_errors(tmp_path):
    with pytest.raises(InputFileNotFoundError):
        read_edge_list(tmp_path / "missing.txt")
    bad = tmp_path / "bad.txt"
    bad.write_text("0 1\n0 x\n")
    with pytest.raises(InputFormatError):
        read_edge_list(bad)
    loops = tmp_path / "loops.txt"
    loops.write_text("0 0\n")
    with pytest.raises(InvalidGraphError):
        read_edge_list(loops)


@given(graphs())
@settings(max_examples=60, deadline=None)
def test_components_match_flood_fill(g):
    expected = sorted(sorted(c) for c in bfs_components(g))
    got = sorted(grp.tolist() for grp in connected_components(g).groups())
    assert got == expected


@given(graphs(weighted=True))
@settings(max_examples=40, deadline=None)
def test_transition_rows_are_stochastic(g):
    walk = transition_matrix(g).toarray()
    assert np.allclose(walk.sum(axis=1), 1.0)
    assert np.allclose(walk, dense_walk(g))


@pytest.mark.slow
@given(st.integers(min_value=0, max_value=2**32 - 1))
@settings(max_examples=200, deadline=None)
def test_components_match_flood_fill_on_sampled_graphs(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 51))
    g = random_graph(rng, n, float(rng.uniform(0.0, 3.0 / n)))
    expected = sorted(sorted(c) for c in bfs_components(g))
    got = sorted(grp.tolist() for grp in connected_components(g).groups())
    assert got == expected
