"""
Graph Loader Agent

This agent ingests the inputs of a run: the relationship graph (edge list,
or embeddings turned into a kNN graph, or both combined), the lens matrix
and the per-vertex labels.
"""

from pathlib import Path
from typing import Any, Dict, Optional

from reebnet.diagnose import LabelData, read_labels_csv
from reebnet.graph import Graph, read_edge_list, union_graphs
from reebnet.lens import LensMatrix, read_lens_csv
from reebnet.preprocess import EmbeddingMatrix, knn_graph, l2_normalize, pca_whiten, read_embeddings
from utils.logger import get_logger
from utils.exceptions import (
    DataIOException,
    DimensionMismatchError,
    GraphLoaderException,
    InputFileNotFoundError,
    ReebNetException,
)

logger = get_logger(__name__)


class GraphLoaderAgent:
    """
    Agent responsible for loading graphs, lenses and labels

    Features:
    - Edge-list graphs with optional weights
    - Embeddings to kNN graphs (optional PCA whitening, cosine or euclidean)
    - Lens and label CSVs checked against the graph size
    """

    def __init__(self, knn_config: Optional[Dict[str, Any]] = None, seed: int = 0, workers: int = 1):
        """
        Initialize Graph Loader Agent

        Args:
            knn_config: The `knn` configuration section (k, metric, pca_dim)
            seed: Seed for the PCA power iteration
            workers: Threads for kNN distance scans
        """
        self.knn_config = {"k": 5, "metric": "cosine", "pca_dim": None, **(knn_config or {})}
        self.seed = seed
        self.workers = workers
        logger.info("Graph Loader Agent initialized", extra={"knn": self.knn_config})

    def load_graph(
        self,
        graph_path: Optional[Path] = None,
        embeddings_path: Optional[Path] = None
    ) -> Graph:
        """
        Load the relationship graph

        With both inputs the edge list and the kNN graph are combined by
        edge union.

        Raises:
            InputFileNotFoundError: If neither input is given or a file is missing
            GraphLoaderException: If the inputs cannot be turned into a graph
        """
        if graph_path is None and embeddings_path is None:
            raise InputFileNotFoundError("No graph input given (--graph or --embeddings)", {"input": "graph"})

        try:
            graph = read_edge_list(graph_path) if graph_path is not None else None
            if embeddings_path is not None:
                embedded = self.embeddings_to_graph(read_embeddings(embeddings_path))
                if graph is None:
                    graph = embedded
                else:
                    # edge lists may omit trailing isolated vertices
                    if graph.n < embedded.n:
                        graph = read_edge_list(graph_path, n=embedded.n)
                    graph = union_graphs(graph, embedded)
        except (DataIOException, DimensionMismatchError):
            raise
        except ReebNetException as e:
            logger.error("Failed to build graph", extra=e.to_dict(), exc_info=True)
            raise GraphLoaderException("Failed to build graph from inputs", {"error": e.message, **e.details})

        logger.info("Graph loaded", extra={"n": graph.n, "edges": graph.num_edges, "weighted": graph.is_weighted})
        return graph

    def embeddings_to_graph(self, e: EmbeddingMatrix) -> Graph:
        """PCA-whiten (if configured), normalize for cosine, then kNN"""
        pca_dim = self.knn_config.get("pca_dim")
        metric = self.knn_config["metric"]
        if pca_dim:
            e = pca_whiten(e, int(pca_dim), seed=self.seed)
        if metric == "cosine":
            e = l2_normalize(e)
        return knn_graph(e, int(self.knn_config["k"]), metric, self.workers)

    def load_lens(self, lens_path: Path, n: int) -> LensMatrix:
        """
        Raises:
            DimensionMismatchError: If the lens has a row count other than n
        """
        lens = read_lens_csv(lens_path)
        if lens.n != n:
            raise DimensionMismatchError(
                f"Lens file {lens_path} has {lens.n} rows, graph has {n} vertices",
                {"path": str(lens_path), "lens_rows": lens.n, "n": n}
            )
        logger.info("Lens loaded", extra={"path": str(lens_path), "lenses": lens.m})
        return lens

    def load_labels(self, labels_path: Path, n: int, num_classes: Optional[int] = None) -> LabelData:
        labels = read_labels_csv(labels_path, n=n, num_classes=num_classes)
        logger.info(
            "Labels loaded",
            extra={
                "path": str(labels_path),
                "training": int(labels.training_mask.sum()),
                "has_probabilities": labels.prediction_probs is not None,
                "has_truth": labels.truth is not None,
            }
        )
        return labels
