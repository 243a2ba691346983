"""Recursive lens splitting"""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from reebnet.graph import Graph
from reebnet.lens import LensMatrix, lens_spreads
from reebnet.splitter import GtdaParams, gtda_split, split_once
from testing_oracles import bfs_components, graphs_with_lens, is_connected_set
from utils.exceptions import DimensionMismatchError, InvalidParameterError, ZeroSpreadError


def lens(values):
    return LensMatrix(values=np.asarray(values, dtype=np.float64).reshape(-1, 1))


def test_split_without_overlap(path4):
    parts = split_once(path4, lens([0.0, 0.3, 0.7, 1.0]), np.arange(4), 0, 0.0)
    assert [p.tolist() for p in parts] == [[0, 1], [2, 3]]


def test_split_overlap_widens_left_bin(path4):
    parts = split_once(path4, lens([0.0, 0.4, 0.52, 1.0]), np.arange(4), 0, 0.05)
    assert [p.tolist() for p in parts] == [[0, 1, 2], [2, 3]]


def test_split_recomponents_each_bin(path4):
    parts = split_once(path4, lens([0.0, 1.0, 0.2, 0.9]), np.arange(4), 0, 0.0)
    assert [p.tolist() for p in parts] == [[0], [2], [1], [3]]


def test_split_rejects_constant_lens(path4):
    with pytest.raises(ZeroSpreadError):
        split_once(path4, lens([0.5, 0.5, 0.5, 0.5]), np.arange(4), 0, 0.0)


def test_small_components_are_final_immediately(two_cliques, positional_lens):
    result = gtda_split(two_cliques, positional_lens(12), GtdaParams(max_size=12))
    assert len(result) == 1
    assert result.sets[0].tolist() == list(range(12))
    assert result.num_generations == 0
    assert result.paths == [()]


def test_path_splits_down_to_max_size(positional_lens):
    g = Graph.from_edges(16, [(i, i + 1) for i in range(15)])
    result = gtda_split(g, positional_lens(16), GtdaParams(max_size=4, overlap=0.0))
    assert all(s.size <= 4 for s in result.sets)
    assert np.array_equal(np.unique(np.concatenate(result.sets)), np.arange(16))
    assert result.num_generations == 2
    assert all(len(path) == gen for path, gen in zip(result.paths, result.generations))


def test_min_diff_stops_flat_sets(path4):
    result = gtda_split(path4, lens([0.0, 0.05, 0.1, 0.1]), GtdaParams(max_size=1, min_diff=0.2))
    assert [s.tolist() for s in result.sets] == [[0, 1, 2, 3]]


def test_lens_size_mismatch(path4):
    with pytest.raises(DimensionMismatchError):
        gtda_split(path4, lens([0.0, 1.0]), GtdaParams(max_size=2))


def test_params_from_config_requires_max_size():
    with pytest.raises(InvalidParameterError):
        GtdaParams.from_config({"overlap": 0.1})
    params = GtdaParams.from_config({"max_size": 10, "overlap": 0.1}, overlap=0.2, min_node=None)
    assert params.overlap == 0.2
    assert params.min_node == 5
    assert params.to_dict()["max_size"] == 10


@pytest.mark.parametrize("changes", [
    {"max_size": 0},
    {"min_diff": -0.1},
    {"overlap": 1.0},
    {"min_node": 0},
    {"min_component": 0},
    {"alpha": 1.5},
    {"smooth_steps": -1},
])
def test_params_validation(changes):
    values = {"max_size": 5}
    values.update(changes)
    with pytest.raises(InvalidParameterError):
        GtdaParams(**values).validate()


@given(
    graphs_with_lens(min_n=2, max_n=30),
    st.integers(min_value=1, max_value=8),
    st.sampled_from([0.0, 0.01, 0.1, 0.3]),
    st.sampled_from([0.0, 0.05]),
)
@settings(max_examples=80, deadline=None)
def test_final_sets_cover_and_are_connected(instance, max_size, overlap, min_diff):
    g, p = instance
    params = GtdaParams(max_size=max_size, overlap=overlap, min_diff=min_diff)
    result = gtda_split(g, p, params)

    assert np.array_equal(np.unique(np.concatenate(result.sets)), np.arange(g.n))
    keys = [s.tobytes() for s in result.sets]
    assert len(keys) == len(set(keys))

    for i, s in enumerate(result.sets):
        assert is_connected_set(g, s)
        done = s.size <= max_size or float(lens_spreads(p, s).max()) <= min_diff
        assert done or i in result.forced

    order = [(gen, int(s[0]), s.size) for gen, s in zip(result.generations, result.sets)]
    assert order == sorted(order)


@given(graphs_with_lens(min_n=2, max_n=30), st.integers(min_value=2, max_value=4))
@settings(max_examples=30, deadline=None)
def test_split_does_not_depend_on_workers(instance, workers):
    g, p = instance
    params = GtdaParams(max_size=2, overlap=0.1)
    single = gtda_split(g, p, params, workers=1)
    multi = gtda_split(g, p, params, workers=workers)
    assert [s.tolist() for s in single.sets] == [s.tolist() for s in multi.sets]
    assert single.paths == multi.paths


@given(graphs_with_lens(min_n=1, max_n=20))
@settings(max_examples=30, deadline=None)
def test_large_max_size_returns_components(instance):
    g, p = instance
    result = gtda_split(g, p, GtdaParams(max_size=g.n))
    expected = sorted(sorted(c) for c in bfs_components(g))
    assert sorted(s.tolist() for s in result.sets) == expected
