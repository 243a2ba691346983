"""Shared fixtures for the Reeb net test suite"""

import os

import numpy as np
import pytest

# keep test output readable; records still go through the JSON formatter
os.environ.setdefault("LOG_LEVEL", "WARNING")

from reebnet.datasets import surrogate_predictor, swiss_roll  # noqa: E402
from reebnet.diagnose import LabelData  # noqa: E402
from reebnet.graph import Graph  # noqa: E402
from reebnet.lens import LensMatrix  # noqa: E402


@pytest.fixture
def path4() -> Graph:
    return Graph.from_edges(4, [(0, 1), (1, 2), (2, 3)])


@pytest.fixture
def triangle() -> Graph:
    return Graph.from_edges(3, [(0, 1), (1, 2), (0, 2)])


@pytest.fixture
def two_cliques() -> Graph:
    """Two 6-cliques joined by the single edge 5-6"""
    edges = [(i, j) for base in (0, 6) for i in range(base, base + 6) for j in range(i + 1, base + 6)]
    edges.append((5, 6))
    return Graph.from_edges(12, edges)


@pytest.fixture
def two_class_labels() -> LabelData:
    """Six points, training labels on 0 and 5, one prediction disagreeing with truth"""
    return LabelData(
        predicted=np.array([0, 0, 0, 1, 1, 1]),
        training_mask=np.array([True, False, False, False, False, True]),
        training_labels=np.array([0, -1, -1, -1, -1, 1]),
        prediction_probs=np.array([0.9, 0.8, 0.6, 0.55, 0.7, 0.95]),
        truth=np.array([0, 0, 1, 1, 1, 1]),
        num_classes=2,
    )


@pytest.fixture(scope="session")
def reference_roll():
    """The n=1000, noise 1.2 Swiss roll with surrogate predictions (seed 0)"""
    inst = swiss_roll(n=1000, noise=1.2, seed=0)
    lens, labels = surrogate_predictor(inst, label_noise=0.15, seed=0)
    return inst, lens, labels


@pytest.fixture
def positional_lens():
    def make(n: int) -> LensMatrix:
        return LensMatrix(values=np.linspace(0.0, 1.0, n).reshape(-1, 1))
    return make
