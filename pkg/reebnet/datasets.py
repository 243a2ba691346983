"""
Synthetic Datasets

The 3-class Swiss roll with its 5-NN data graph and 2-NN feature graph,
and a diffusion-based surrogate predictor that plays the role of a
trained graph model: it propagates (partly corrupted) training labels
over the data graph and reports per-class probabilities as lenses.
"""

from dataclasses import dataclass
from pathlib import Path
from typing import Tuple, Union

import numpy as np
from sklearn.datasets import make_swiss_roll

from reebnet.diagnose import UNDEFINED, LabelData, write_labels_csv
from reebnet.graph import Graph, transition_matrix, union_graphs, write_edge_list
from reebnet.lens import LensMatrix, diffuse, write_lens_csv
from reebnet.preprocess import EmbeddingMatrix, knn_graph, l2_normalize, pca_whiten
from utils.helpers import ensure_directory
from utils.logger import get_logger
from utils.exceptions import InvalidParameterError

logger = get_logger(__name__)

NUM_CLASSES = 3
TRAIN_FRACTION = 0.1
VALIDATION_FRACTION = 0.1
GRAPH_K = 5

SURROGATE_ALPHA = 0.85
SURROGATE_STEPS = 20
# weight of its own (possibly corrupted) label in a seed point's lens row
SURROGATE_TRAIN_FIT = 0.6


@dataclass
class SwissRollInstance:
    """
    Swiss roll sample

    coords3d are the sampled points, t the position along the roll,
    features columns 0 and 2 of coords3d. graph is the 5-NN euclidean graph
    on coords3d, feature_graph the 2-NN cosine graph on the whitened
    features, combined_graph their union.
    """

    coords3d: np.ndarray
    t: np.ndarray
    features: np.ndarray
    labels: np.ndarray
    train_mask: np.ndarray
    validation_mask: np.ndarray
    test_mask: np.ndarray
    graph: Graph
    feature_graph: Graph
    combined_graph: Graph

    @property
    def n(self) -> int:
        return int(self.labels.shape[0])

    @property
    def seed_mask(self) -> np.ndarray:
        """Points whose labels the model sees: train and validation"""
        return self.train_mask | self.validation_mask


def swiss_roll(n: int = 1000, noise: float = 1.2, seed: int = 0, feature_k: int = 2) -> SwissRollInstance:
    """
    Sample the 3-class Swiss roll

    Points are sorted by roll position and cut into thirds for the classes;
    10% of points are drawn for training and another 10% for validation.

    Raises:
        InvalidParameterError: If n < 30 or noise < 0
    """
    if n < 30:
        raise InvalidParameterError("Swiss roll needs at least 30 points", {"n": n})
    if noise < 0:
        raise InvalidParameterError("noise must be nonnegative", {"noise": noise})

    coords, t = make_swiss_roll(n_samples=n, noise=noise, random_state=seed)
    features = coords[:, [0, 2]]

    labels = np.empty(n, dtype=np.int64)
    for cls, idx in enumerate(np.array_split(np.argsort(t, kind="stable"), NUM_CLASSES)):
        labels[idx] = cls

    rng = np.random.default_rng(seed)
    order = rng.permutation(n)
    n_train = int(round(TRAIN_FRACTION * n))
    n_val = int(round(VALIDATION_FRACTION * n))
    train_mask = np.zeros(n, dtype=bool)
    validation_mask = np.zeros(n, dtype=bool)
    train_mask[order[:n_train]] = True
    validation_mask[order[n_train:n_train + n_val]] = True

    graph = knn_graph(EmbeddingMatrix(coords), GRAPH_K, metric="euclidean")
    whitened = l2_normalize(pca_whiten(EmbeddingMatrix(features), target_dim=2, seed=seed))
    feature_graph = knn_graph(whitened, feature_k, metric="cosine")

    inst = SwissRollInstance(
        coords3d=coords,
        t=t,
        features=features,
        labels=labels,
        train_mask=train_mask,
        validation_mask=validation_mask,
        test_mask=~(train_mask | validation_mask),
        graph=graph,
        feature_graph=feature_graph,
        combined_graph=union_graphs(graph, feature_graph),
    )
    logger.info(
        "Sampled Swiss roll",
        extra={
            "n": n,
            "noise": noise,
            "seed": seed,
            "graph_edges": graph.num_edges,
            "combined_edges": inst.combined_graph.num_edges,
        }
    )
    return inst


def surrogate_predictor(
    inst: SwissRollInstance,
    label_noise: float = 0.15,
    seed: int = 0
) -> Tuple[LensMatrix, LabelData]:
    """
    Simulated model outputs for a Swiss roll instance

    One-hot labels of the train and validation points, a label_noise
    fraction of them switched to a wrong class, are diffused over the data
    graph and row-normalized into a probability lens. Seed points lean
    towards the label they were given, so the model fits its training data.
    Points reached by no seed get a uniform row.

    The returned LabelData records the clean labels of the seed points as
    training labels and all true labels as truth.

    Raises:
        InvalidParameterError: If label_noise is not in [0, 1)
    """
    if not 0.0 <= label_noise < 1.0:
        raise InvalidParameterError("label_noise must lie in [0, 1)", {"label_noise": label_noise})

    rng = np.random.default_rng(seed)
    seeds = np.flatnonzero(inst.seed_mask)
    seen = inst.labels[seeds].copy()
    corrupt = rng.choice(seeds.size, size=int(round(label_noise * seeds.size)), replace=False)
    seen[corrupt] = (seen[corrupt] + rng.integers(1, NUM_CLASSES, size=corrupt.size)) % NUM_CLASSES

    one_hot = np.zeros((inst.n, NUM_CLASSES))
    one_hot[seeds, seen] = 1.0
    diffused = diffuse(transition_matrix(inst.graph), one_hot, SURROGATE_ALPHA, SURROGATE_STEPS)

    mass = diffused.sum(axis=1, keepdims=True)
    probs = np.full_like(diffused, 1.0 / NUM_CLASSES)
    np.divide(diffused, mass, out=probs, where=mass > 0)
    probs[seeds] = (1.0 - SURROGATE_TRAIN_FIT) * probs[seeds] + SURROGATE_TRAIN_FIT * one_hot[seeds]

    predicted = np.argmax(probs, axis=1)
    training_labels = np.full(inst.n, UNDEFINED, dtype=np.int64)
    training_labels[seeds] = inst.labels[seeds]

    lens = LensMatrix(values=probs, column_names=[f"class_{c}" for c in range(NUM_CLASSES)])
    labels = LabelData(
        predicted=predicted,
        training_mask=inst.seed_mask.copy(),
        training_labels=training_labels,
        prediction_probs=probs.max(axis=1),
        truth=inst.labels.copy(),
        num_classes=NUM_CLASSES,
    )

    test = inst.test_mask
    accuracy = float(np.mean(predicted[test] == inst.labels[test])) if test.any() else None
    logger.info(
        "Surrogate predictions ready",
        extra={"label_noise": label_noise, "corrupted_seeds": int(corrupt.size), "test_accuracy": accuracy}
    )
    return lens, labels


def write_instance(
    inst: SwissRollInstance,
    lens: LensMatrix,
    labels: LabelData,
    directory: Union[str, Path]
):
    """Write edges.txt (combined graph), lens.csv and labels.csv"""
    out = ensure_directory(directory)
    write_edge_list(inst.combined_graph, out / "edges.txt")
    write_lens_csv(lens, out / "lens.csv")
    write_labels_csv(labels, out / "labels.csv")
    logger.info("Wrote synthetic instance", extra={"directory": str(out), "n": inst.n})
