"""Lens smoothing, normalization, spreads and lens CSV IO"""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from reebnet.graph import Graph, transition_matrix
from reebnet.lens import (
    LInfDistance,
    LensMatrix,
    SmoothingParams,
    diffuse,
    lens_distance,
    lens_spreads,
    make_merge_distance,
    max_diff_lens,
    minmax_normalize,
    read_lens_csv,
    smooth,
    write_lens_csv,
)
from testing_oracles import dense_diffusion, graphs_with_lens, random_graph
from utils.exceptions import (
    DimensionMismatchError,
    InputFileNotFoundError,
    InputFormatError,
    InvalidInputError,
    InvalidParameterError,
    NonFiniteLensError,
)


def test_single_step_on_two_path_averages():
    g = Graph.from_edges(2, [(0, 1)])
    p = LensMatrix(values=np.array([[0.0], [1.0]]))
    out = smooth(p, g, SmoothingParams(alpha=0.5, steps=1))
    assert np.allclose(out.values.ravel(), [0.5, 0.5])


def test_zero_steps_returns_copy(path4):
    p = LensMatrix(values=np.arange(4.0))
    out = smooth(p, path4, SmoothingParams(alpha=0.5, steps=0))
    assert np.array_equal(out.values, p.values)
    assert out.values is not p.values


def test_isolated_vertex_keeps_its_value():
    g = Graph.from_edges(3, [(0, 1)])
    p = LensMatrix(values=np.array([0.0, 1.0, 0.7]))
    out = smooth(p, g, SmoothingParams(alpha=0.9, steps=10))
    assert out.values[2, 0] == pytest.approx(0.7)


def test_smooth_checks_shapes_and_finiteness(path4):
    with pytest.raises(DimensionMismatchError):
        smooth(LensMatrix(values=np.zeros(3)), path4, SmoothingParams())
    with pytest.raises(NonFiniteLensError):
        smooth(LensMatrix(values=np.array([0.0, np.nan, 1.0, 2.0])), path4, SmoothingParams())


@pytest.mark.parametrize("alpha,steps", [(0.0, 5), (1.0, 5), (0.5, -1)])
def test_smoothing_params_validation(alpha, steps):
    with pytest.raises(InvalidParameterError):
        SmoothingParams(alpha=alpha, steps=steps).validate()


def test_minmax_normalize_columns():
    p = LensMatrix(values=np.array([[2.0, 5.0], [4.0, 5.0], [6.0, 5.0]]))
    out = minmax_normalize(p)
    assert out.values[:, 0].tolist() == [0.0, 0.5, 1.0]
    assert out.values[:, 1].tolist() == [0.0, 0.0, 0.0]


def test_spreads_and_max_diff_lens():
    p = LensMatrix(values=np.array([[0.0, 0.2], [0.5, 0.9], [0.1, 0.3]]))
    s = np.array([0, 2])
    assert np.allclose(lens_spreads(p, s), [0.1, 0.1])
    assert max_diff_lens(p, s) == 0
    assert max_diff_lens(p, np.array([0, 1])) == 1
    with pytest.raises(InvalidInputError):
        max_diff_lens(p, np.zeros(0, dtype=np.int64))


def test_linf_distance():
    p = LensMatrix(values=np.array([[0.1, 0.5], [0.4, 0.3]]))
    assert lens_distance(p, 0, 1) == pytest.approx(0.3)
    dist = make_merge_distance("linf", p)
    assert isinstance(dist, LInfDistance)
    assert np.allclose(dist(np.array([0, 1]), np.array([1, 1])), [0.3, 0.0])
    with pytest.raises(InvalidParameterError):
        make_merge_distance("manhattan", p)


def test_lens_matrix_names_default_and_checked():
    p = LensMatrix(values=np.zeros((3, 2)))
    assert p.column_names == ["lens_0", "lens_1"]
    with pytest.raises(DimensionMismatchError):
        LensMatrix(values=np.zeros((3, 2)), column_names=["only"])


def test_lens_csv_round_trip(tmp_path):
    p = LensMatrix(values=np.array([[0.1, 0.9], [1.0 / 3.0, 0.0]]), column_names=["cat", "dog"])
    path = tmp_path / "lens.csv"
    write_lens_csv(p, path)
    back = read_lens_csv(path)
    assert back.column_names == ["cat", "dog"]
    assert np.array_equal(back.values, p.values)


def test_lens_csv_errors(tmp_path):
    with pytest.raises(InputFileNotFoundError):
        read_lens_csv(tmp_path / "missing.csv")
    ragged = tmp_path / "ragged.csv"
    ragged.write_text("a,b\n0.1,0.2\n0.3\n")
    with pytest.raises(InputFormatError):
        read_lens_csv(ragged)
    nan = tmp_path / "nan.csv"
    nan.write_text("a\n0.1\nnan\n")
    with pytest.raises(NonFiniteLensError):
        read_lens_csv(nan)


@given(graphs_with_lens(), st.floats(min_value=0.05, max_value=0.95), st.integers(min_value=0, max_value=6))
@settings(max_examples=50, deadline=None)
def test_smoothing_matches_dense_closed_form(instance, alpha, steps):
    g, p = instance
    out = smooth(p, g, SmoothingParams(alpha=alpha, steps=steps))
    assert np.allclose(out.values, dense_diffusion(g, p.values, alpha, steps))
    # convex combinations stay inside the input range
    assert out.values.min() >= p.values.min() - 1e-12
    assert out.values.max() <= p.values.max() + 1e-12


@given(graphs_with_lens(max_lenses=4), st.integers(min_value=1, max_value=4))
@settings(max_examples=30, deadline=None)
def test_diffusion_does_not_depend_on_workers(instance, workers):
    g, p = instance
    walk = transition_matrix(g)
    single = diffuse(walk, p.values, 0.5, 5, workers=1)
    assert np.array_equal(diffuse(walk, p.values, 0.5, 5, workers=workers), single)


@pytest.mark.slow
@given(st.integers(min_value=0, max_value=2**32 - 1))
@settings(max_examples=1000, deadline=None)
def test_smoothing_matches_dense_closed_form_at_scale(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 501))
    g = random_graph(rng, n, float(rng.uniform(0.0, 6.0 / n)), weighted=bool(rng.integers(2)))
    p = LensMatrix(values=rng.random((n, int(rng.integers(1, 4)))))
    alpha, steps = float(rng.uniform(0.05, 0.95)), int(rng.integers(0, 11))
    out = smooth(p, g, SmoothingParams(alpha=alpha, steps=steps))
    assert np.allclose(out.values, dense_diffusion(g, p.values, alpha, steps))
