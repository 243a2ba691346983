"""
Embedding Preprocessing

Turns node embeddings into relationship graphs: PCA whitening (deflated
power iteration on the covariance), row l2 normalization and exact
k-nearest-neighbor graphs under cosine or euclidean distance.
"""

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Union

import numpy as np
from scipy.spatial.distance import cdist

from reebnet.graph import Graph, union_graphs
from utils.helpers import parallel_map
from utils.logger import get_logger
from utils.exceptions import (
    InputFileNotFoundError,
    InputFormatError,
    InvalidInputError,
    InvalidParameterError,
)

logger = get_logger(__name__)

METRICS = ("cosine", "euclidean")
BINARY_SUFFIXES = (".bin", ".f64")

# rows of the distance matrix computed per block
KNN_BLOCK_ROWS = 1024

# eigenvalues below this fraction of the largest count as zero
RANK_TOLERANCE = 1e-10


@dataclass
class EmbeddingMatrix:
    """
    n x D embedding values

    zero_rows flags rows that were zero when l2-normalized; dropped_dims
    counts components pca_whiten could not produce.
    """

    values: np.ndarray
    zero_rows: Optional[np.ndarray] = None
    dropped_dims: int = 0

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 2:
            raise InvalidInputError("Embeddings must be a 2-D matrix", {"ndim": values.ndim})
        if not np.all(np.isfinite(values)):
            raise InvalidInputError("Embeddings contain non-finite entries")
        self.values = values

    @property
    def n(self) -> int:
        return int(self.values.shape[0])

    @property
    def dim(self) -> int:
        return int(self.values.shape[1])


def power_iteration(
    c: np.ndarray,
    rng: np.random.Generator,
    tol: float = 1e-9,
    max_iter: int = 1000
):
    """
    Dominant eigenpair of a symmetric PSD matrix

    Stops once the residual ||C x - lambda x|| drops below tol times the
    matrix scale.

    Returns:
        Tuple (eigenvalue, unit eigenvector, converged flag)
    """
    x = rng.standard_normal(c.shape[0])
    x /= np.linalg.norm(x)
    scale = max(float(np.abs(c).max()), 1.0)
    lam = 0.0

    for _ in range(max_iter):
        y = c @ x
        norm = np.linalg.norm(y)
        if norm == 0.0:
            return 0.0, x, True
        lam = float(x @ y)
        x = y / norm
        if np.linalg.norm(c @ x - lam * x) < tol * scale:
            return lam, x, True

    return lam, x, False


def _fix_sign(v: np.ndarray) -> np.ndarray:
    nonzero = np.flatnonzero(np.abs(v) > 1e-12)
    if nonzero.size and v[nonzero[0]] < 0:
        return -v
    return v


def pca_whiten(
    e: EmbeddingMatrix,
    target_dim: int,
    seed: int = 0,
    tol: float = 1e-9,
    max_iter: int = 1000
) -> EmbeddingMatrix:
    """
    Project centered rows onto the top target_dim principal directions,
    scaled to unit variance

    Directions come from power iteration with deflation on the sample
    covariance; each is signed so its first nonzero coordinate is positive.
    If the data has rank below target_dim the trailing dimensions are
    dropped with a warning and reported in dropped_dims.

    Raises:
        InvalidParameterError: If target_dim is not in [1, min(n, D)]
    """
    n, dim = e.values.shape
    if not 1 <= target_dim <= min(n, dim):
        raise InvalidParameterError(
            "target_dim must lie in [1, min(n, D)]",
            {"target_dim": target_dim, "n": n, "D": dim}
        )

    centered = e.values - e.values.mean(axis=0)
    cov = centered.T @ centered / max(n - 1, 1)
    rng = np.random.default_rng(seed)

    directions: List[np.ndarray] = []
    variances: List[float] = []
    largest = None
    for k in range(target_dim):
        lam, v, converged = power_iteration(cov, rng, tol, max_iter)
        if largest is None:
            largest = lam
        if lam <= RANK_TOLERANCE * max(largest, 1e-300) or lam <= 0:
            break
        if not converged:
            logger.warning("Power iteration did not converge", extra={"component": k, "eigenvalue": lam})
        v = _fix_sign(v)
        directions.append(v)
        variances.append(lam)
        cov = cov - lam * np.outer(v, v)

    dropped = target_dim - len(directions)
    if dropped:
        logger.warning(
            "Embedding rank below target dimension, dropping trailing components",
            extra={"target_dim": target_dim, "kept": len(directions), "dropped": dropped}
        )
    if not directions:
        return EmbeddingMatrix(values=np.zeros((n, 0)), dropped_dims=dropped)

    basis = np.column_stack(directions)
    whitened = centered @ basis / np.sqrt(np.asarray(variances))
    return EmbeddingMatrix(values=whitened, dropped_dims=dropped)


def l2_normalize(e: EmbeddingMatrix) -> EmbeddingMatrix:
    """Scale each row to unit norm; zero rows stay zero and are flagged"""
    norms = np.linalg.norm(e.values, axis=1)
    zero = norms == 0
    out = np.zeros_like(e.values)
    np.divide(e.values, norms[:, None], out=out, where=~zero[:, None])
    if zero.any():
        logger.warning("Zero embedding rows left unnormalized", extra={"rows": int(zero.sum())})
    return EmbeddingMatrix(values=out, zero_rows=zero, dropped_dims=e.dropped_dims)


def pairwise_distances(queries: np.ndarray, data: np.ndarray, metric: str) -> np.ndarray:
    """
    Distance block between query rows and all rows

    For cosine both inputs must already be l2-normalized; the distance is
    1 - dot product, so a zero row is at distance 1 from everything.
    """
    if metric == "euclidean":
        return cdist(queries, data, metric="euclidean")
    return 1.0 - queries @ data.T


def _nearest(block: np.ndarray, offset: int, k: int) -> np.ndarray:
    """k nearest columns per row of a distance block; ties to the smaller index"""
    rows = np.arange(block.shape[0])
    block[rows, rows + offset] = np.inf
    kth = np.partition(block, k - 1, axis=1)[:, k - 1]
    out = np.empty((block.shape[0], k), dtype=np.int64)
    for r in rows:
        cand = np.flatnonzero(block[r] <= kth[r])
        order = np.lexsort((cand, block[r, cand]))
        out[r] = cand[order[:k]]
    return out


def knn_graph(
    e: EmbeddingMatrix,
    k: int,
    metric: str = "cosine",
    workers: int = 1
) -> Graph:
    """
    Exact k-nearest-neighbor graph, union-symmetrized

    Each row links to its k nearest other rows (self excluded, distance
    ties to the smaller index); an edge exists if either endpoint chose
    the other. k larger than n - 1 is clipped, giving the complete graph.

    Raises:
        InvalidParameterError: On k < 1, n < 2 or an unknown metric
    """
    if metric not in METRICS:
        raise InvalidParameterError(f"Unknown metric: {metric}", {"metric": metric, "available": list(METRICS)})
    if k < 1:
        raise InvalidParameterError("k must be at least 1", {"k": k})
    n = e.n
    if n < 2:
        raise InvalidParameterError("kNN graph needs at least 2 rows", {"n": n})

    k_eff = min(k, n - 1)
    data = l2_normalize(e).values if metric == "cosine" else e.values
    starts = list(range(0, n, KNN_BLOCK_ROWS))

    def neighbors_of(start: int) -> np.ndarray:
        stop = min(start + KNN_BLOCK_ROWS, n)
        block = pairwise_distances(data[start:stop], data, metric)
        return _nearest(block, start, k_eff)

    nbrs = np.vstack(parallel_map(neighbors_of, starts, workers))
    src = np.repeat(np.arange(n, dtype=np.int64), k_eff)
    g = Graph.from_pairs(n, src, nbrs.ravel())

    logger.info("Built kNN graph", extra={"n": n, "k": k_eff, "metric": metric, "edges": g.num_edges})
    return g


def augment_graph(base: Graph, e: EmbeddingMatrix, k: int, metric: str = "cosine", workers: int = 1) -> Graph:
    """Union of a given graph with the kNN graph of the embeddings"""
    return union_graphs(base, knn_graph(e, k, metric, workers))


def _looks_numeric(cells: List[str]) -> bool:
    try:
        [float(c) for c in cells]
    except ValueError:
        return False
    return True


def read_embeddings_csv(path: Union[str, Path]) -> EmbeddingMatrix:
    """CSV with one datapoint per row; a non-numeric first row is a header"""
    with open(path, "r", newline="") as f:
        rows = [row for row in csv.reader(f) if row and any(c.strip() for c in row)]
    if rows and not _looks_numeric(rows[0]):
        rows = rows[1:]
    if not rows:
        raise InputFormatError(f"No embedding rows in {path}", {"path": str(path)})
    width = len(rows[0])
    for lineno, row in enumerate(rows, start=1):
        if len(row) != width or not _looks_numeric(row):
            raise InputFormatError(
                f"Bad embedding row {lineno} in {path}",
                {"path": str(path), "row": lineno}
            )
    return EmbeddingMatrix(np.array([[float(c) for c in row] for row in rows]))


def read_embeddings_binary(path: Union[str, Path]) -> EmbeddingMatrix:
    """int64 n, int64 D little-endian header followed by n*D little-endian float64"""
    raw = Path(path).read_bytes()
    if len(raw) < 16:
        raise InputFormatError(f"Embedding file {path} is too short for its header", {"path": str(path)})
    n, dim = (int(x) for x in np.frombuffer(raw[:16], dtype="<i8"))
    body = np.frombuffer(raw[16:], dtype="<f8")
    if n < 0 or dim < 0 or body.size != n * dim:
        raise InputFormatError(
            f"Embedding file {path} holds {body.size} values, header says {n}x{dim}",
            {"path": str(path), "n": n, "D": dim}
        )
    return EmbeddingMatrix(body.reshape(n, dim).astype(np.float64))


def read_embeddings(path: Union[str, Path]) -> EmbeddingMatrix:
    """
    Read embeddings, binary for .bin/.f64 files and CSV otherwise

    Raises:
        InputFileNotFoundError: If the file does not exist
        InputFormatError: If the content does not parse
    """
    file_path = Path(path)
    if not file_path.exists():
        raise InputFileNotFoundError(f"Embeddings file not found: {path}", {"path": str(path)})
    if file_path.suffix.lower() in BINARY_SUFFIXES:
        e = read_embeddings_binary(file_path)
    else:
        e = read_embeddings_csv(file_path)
    logger.debug("Read embeddings", extra={"path": str(path), "n": e.n, "D": e.dim})
    return e


def write_embeddings_binary(e: EmbeddingMatrix, path: Union[str, Path]):
    file_path = Path(path)
    file_path.parent.mkdir(parents=True, exist_ok=True)
    header = np.array([e.n, e.dim], dtype="<i8").tobytes()
    file_path.write_bytes(header + e.values.astype("<f8").tobytes())
