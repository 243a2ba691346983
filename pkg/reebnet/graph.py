"""
Core Graph

Sparse undirected graph storage (CSR with sorted neighbor lists) and the
elementary graph passes every other module builds on: connected components,
induced subgraphs, degrees, graph union and the random-walk transition
matrix used by all diffusions.
"""

import re
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import List, Optional, Sequence, Union

import numpy as np
import scipy.sparse as sp
from scipy.sparse import csgraph

from utils.logger import get_logger
from utils.exceptions import (
    DimensionMismatchError,
    InputFileNotFoundError,
    InputFormatError,
    InvalidGraphError,
    InvalidInputError,
)

logger = get_logger(__name__)

# A VertexSet is a sorted, duplicate-free int64 array of vertex ids.
VertexSet = np.ndarray

EDGE_LINE_SPLIT = re.compile(r"[,\s]+")
N_HEADER = re.compile(r"^#\s*n\s*=\s*(\d+)\s*$")


def as_vertex_set(ids: Union[Sequence[int], np.ndarray], n: Optional[int] = None) -> VertexSet:
    """Sort and deduplicate ids; validate range when n is given"""
    arr = np.unique(np.asarray(ids, dtype=np.int64).ravel())
    if n is not None and arr.size and (arr[0] < 0 or arr[-1] >= n):
        raise InvalidInputError(
            "Vertex ids out of range",
            {"n": n, "min": int(arr[0]), "max": int(arr[-1])}
        )
    return arr


@dataclass(frozen=True, eq=False)
class Graph:
    """
    Immutable undirected graph in compressed sparse row form

    Each undirected edge is stored in both endpoint rows with equal weight.
    `weights` is None for unweighted graphs (every edge weighs 1).
    """

    n: int
    indptr: np.ndarray
    indices: np.ndarray
    weights: Optional[np.ndarray] = None

    @classmethod
    def from_edges(
        cls,
        n: int,
        edges: Union[Sequence[Sequence[int]], np.ndarray],
        weights: Optional[Sequence[float]] = None
    ) -> "Graph":
        """
        Build a graph from an undirected edge list, rejecting bad input

        Args:
            n: Vertex count
            edges: One row (u, v) per undirected edge, either orientation
            weights: Optional nonnegative weight per edge

        Returns:
            Graph

        Raises:
            InvalidGraphError: On self-loops, duplicates, out-of-range endpoints
                or invalid weights
        """
        if n < 0:
            raise InvalidGraphError("Vertex count must be nonnegative", {"n": n})

        edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)

        if edges.size and (edges.min() < 0 or edges.max() >= n):
            raise InvalidGraphError(
                "Edge endpoint out of range",
                {"n": n, "min": int(edges.min()), "max": int(edges.max())}
            )

        loops = np.flatnonzero(edges[:, 0] == edges[:, 1])
        if loops.size:
            raise InvalidGraphError(
                "Self-loops are not allowed",
                {"vertex": int(edges[loops[0], 0]), "count": int(loops.size)}
            )

        lo = edges.min(axis=1)
        hi = edges.max(axis=1)
        keys = lo * max(n, 1) + hi
        unique_keys, counts = np.unique(keys, return_counts=True)
        if np.any(counts > 1):
            dup = int(unique_keys[np.argmax(counts > 1)])
            raise InvalidGraphError(
                "Duplicate edges are not allowed",
                {"edge": [dup // max(n, 1), dup % max(n, 1)]}
            )

        w = None
        if weights is not None:
            w = np.asarray(weights, dtype=np.float64).ravel()
            if w.shape[0] != edges.shape[0]:
                raise InvalidGraphError(
                    "Weight count does not match edge count",
                    {"edges": int(edges.shape[0]), "weights": int(w.shape[0])}
                )
            if not np.all(np.isfinite(w)) or np.any(w < 0):
                raise InvalidGraphError("Edge weights must be finite and nonnegative")

        return cls._build(n, lo, hi, w)

    @classmethod
    def from_pairs(
        cls,
        n: int,
        u: np.ndarray,
        v: np.ndarray,
        weights: Optional[np.ndarray] = None
    ) -> "Graph":
        """
        Build a graph from possibly repeated pairs

        Self-loops are dropped and repeated edges collapse to one, keeping
        the maximum weight.
        """
        u = np.asarray(u, dtype=np.int64).ravel()
        v = np.asarray(v, dtype=np.int64).ravel()
        keep = u != v
        lo = np.minimum(u, v)[keep]
        hi = np.maximum(u, v)[keep]
        keys = lo * max(n, 1) + hi

        if weights is None:
            _, first = np.unique(keys, return_index=True)
            return cls._build(n, lo[first], hi[first], None)

        w = np.asarray(weights, dtype=np.float64).ravel()[keep]
        # heaviest copy of each key comes first
        order = np.lexsort((-w, keys))
        keys, lo, hi, w = keys[order], lo[order], hi[order], w[order]
        first = np.ones(keys.size, dtype=bool)
        first[1:] = keys[1:] != keys[:-1]
        return cls._build(n, lo[first], hi[first], w[first])

    @classmethod
    def from_csr(cls, matrix: sp.spmatrix, weighted: bool) -> "Graph":
        """Wrap a symmetric sparse matrix without self-loops"""
        mat = sp.csr_matrix(matrix)
        mat.sort_indices()
        return cls(
            n=int(mat.shape[0]),
            indptr=mat.indptr.astype(np.int64),
            indices=mat.indices.astype(np.int64),
            weights=mat.data.astype(np.float64) if weighted else None,
        )

    @classmethod
    def _build(cls, n: int, lo: np.ndarray, hi: np.ndarray, w: Optional[np.ndarray]) -> "Graph":
        rows = np.concatenate([lo, hi])
        cols = np.concatenate([hi, lo])
        data = np.ones(rows.size) if w is None else np.concatenate([w, w])
        mat = sp.csr_matrix((data, (rows, cols)), shape=(n, n))
        return cls.from_csr(mat, weighted=w is not None)

    @property
    def is_weighted(self) -> bool:
        return self.weights is not None

    @property
    def num_edges(self) -> int:
        return int(self.indices.size // 2)

    def neighbors(self, u: int) -> np.ndarray:
        return self.indices[self.indptr[u]:self.indptr[u + 1]]

    @cached_property
    def _adjacency(self) -> sp.csr_matrix:
        data = self.weights if self.weights is not None else np.ones(self.indices.size)
        return sp.csr_matrix((data, self.indices, self.indptr), shape=(self.n, self.n))

    def adjacency(self) -> sp.csr_matrix:
        """Adjacency matrix A (weights, or ones when unweighted)"""
        return self._adjacency

    def edge_array(self):
        """
        Canonical edge list

        Returns:
            Tuple of (edges, weights): edges is an (m, 2) array with u < v
            in row-major order; weights is None for unweighted graphs
        """
        rows = np.repeat(np.arange(self.n, dtype=np.int64), np.diff(self.indptr))
        upper = rows < self.indices
        edges = np.column_stack([rows[upper], self.indices[upper]])
        weights = self.weights[upper] if self.weights is not None else None
        return edges, weights


@dataclass
class ComponentLabeling:
    """
    Connected component labels over a vertex subset

    label[i] is the component of vertices[i]; components are numbered in
    order of their smallest vertex id.
    """

    label: np.ndarray
    count: int
    vertices: np.ndarray

    def groups(self) -> List[VertexSet]:
        """Component vertex sets (original ids), ordered by smallest member"""
        if self.count == 0:
            return []
        order = np.argsort(self.label, kind="stable")
        sizes = np.bincount(self.label, minlength=self.count)
        return np.split(self.vertices[order], np.cumsum(sizes)[:-1])


@dataclass
class Subgraph:
    """Induced subgraph plus its old-to-new id map (vertices[new] == old)"""

    graph: Graph
    vertices: VertexSet

    def local_ids(self, old_ids: np.ndarray) -> np.ndarray:
        old_ids = np.asarray(old_ids, dtype=np.int64)
        pos = np.searchsorted(self.vertices, old_ids)
        if np.any(pos >= self.vertices.size) or np.any(self.vertices[np.minimum(pos, self.vertices.size - 1)] != old_ids):
            raise InvalidInputError("Vertex not in subgraph")
        return pos


def _restricted_adjacency(g: Graph, vertices: VertexSet) -> sp.csr_matrix:
    return g.adjacency()[vertices][:, vertices]


def connected_components(g: Graph, restrict: Optional[VertexSet] = None) -> ComponentLabeling:
    """
    Label connected components of g, or of the subgraph induced on restrict

    Linear in vertices plus edges of the (sub)graph; the traversal in
    scipy.sparse.csgraph is iterative, so long paths are safe.

    Args:
        g: Graph
        restrict: Optional VertexSet; edges leaving it are ignored

    Returns:
        ComponentLabeling aligned with the restricted vertex order
    """
    if restrict is None:
        vertices = np.arange(g.n, dtype=np.int64)
        mat = g.adjacency()
    else:
        vertices = as_vertex_set(restrict, g.n)
        mat = _restricted_adjacency(g, vertices)

    if vertices.size == 0:
        return ComponentLabeling(label=np.zeros(0, dtype=np.int64), count=0, vertices=vertices)

    count, raw = csgraph.connected_components(mat, directed=False)

    # renumber so component ids follow their smallest vertex
    first = np.full(count, vertices.size, dtype=np.int64)
    np.minimum.at(first, raw, np.arange(vertices.size))
    remap = np.empty(count, dtype=np.int64)
    remap[np.argsort(first)] = np.arange(count)

    return ComponentLabeling(label=remap[raw], count=int(count), vertices=vertices)


def induced_subgraph(g: Graph, s: VertexSet) -> Subgraph:
    """Subgraph on s; only edges with both endpoints in s survive"""
    vertices = as_vertex_set(s, g.n)
    sub = _restricted_adjacency(g, vertices)
    return Subgraph(graph=Graph.from_csr(sub, weighted=g.is_weighted), vertices=vertices)


def union_graphs(g1: Graph, g2: Graph) -> Graph:
    """
    Edge-set union of two graphs on the same vertices

    Edges present in both keep the larger weight; an unweighted side counts
    as weight 1.

    Raises:
        DimensionMismatchError: If vertex counts differ
    """
    if g1.n != g2.n:
        raise DimensionMismatchError(
            "Cannot union graphs of different sizes",
            {"n1": g1.n, "n2": g2.n}
        )

    e1, w1 = g1.edge_array()
    e2, w2 = g2.edge_array()
    edges = np.concatenate([e1, e2])

    if not g1.is_weighted and not g2.is_weighted:
        return Graph.from_pairs(g1.n, edges[:, 0], edges[:, 1])

    w1 = w1 if w1 is not None else np.ones(e1.shape[0])
    w2 = w2 if w2 is not None else np.ones(e2.shape[0])
    return Graph.from_pairs(g1.n, edges[:, 0], edges[:, 1], np.concatenate([w1, w2]))


def degrees(g: Graph) -> np.ndarray:
    """Weighted degree per vertex; zero for isolated vertices"""
    rows = np.repeat(np.arange(g.n, dtype=np.int64), np.diff(g.indptr))
    w = g.weights if g.weights is not None else None
    return np.bincount(rows, weights=w, minlength=g.n).astype(np.float64)


def transition_matrix(g: Graph) -> sp.csr_matrix:
    """
    Random-walk matrix D^-1 A

    Rows of degree-0 vertices are the identity row, so those vertices keep
    their own value under every diffusion built on this matrix.
    """
    deg = degrees(g)
    isolated = deg <= 0
    inv = np.zeros(g.n)
    np.divide(1.0, deg, out=inv, where=~isolated)
    walk = sp.diags(inv) @ g.adjacency() + sp.diags(isolated.astype(np.float64))
    return sp.csr_matrix(walk)


def read_edge_list(path: Union[str, Path], n: Optional[int] = None) -> Graph:
    """
    Read a whitespace/comma separated edge list (`u v [w]`, 0-based ids)

    Lines starting with '#' are comments; a `# n=<count>` header fixes the
    vertex count (otherwise max id + 1, or the explicit n argument).

    Raises:
        InputFileNotFoundError: If the file does not exist
        InputFormatError: If a line cannot be parsed
        InvalidGraphError: If the edges violate graph invariants
    """
    file_path = Path(path)
    if not file_path.exists():
        raise InputFileNotFoundError(f"Edge list not found: {path}", {"path": str(path)})

    us, vs, ws = [], [], []
    header_n = None
    with open(file_path, "r") as f:
        for lineno, raw in enumerate(f, start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                match = N_HEADER.match(line)
                if match:
                    header_n = int(match.group(1))
                continue
            fields = [x for x in EDGE_LINE_SPLIT.split(line) if x]
            if len(fields) not in (2, 3):
                raise InputFormatError(
                    f"Expected 'u v [w]' on line {lineno} of {path}",
                    {"path": str(path), "line": lineno}
                )
            try:
                us.append(int(fields[0]))
                vs.append(int(fields[1]))
                ws.append(float(fields[2]) if len(fields) == 3 else None)
            except ValueError:
                raise InputFormatError(
                    f"Unparseable edge on line {lineno} of {path}",
                    {"path": str(path), "line": lineno}
                )

    if n is None:
        n = header_n if header_n is not None else (max(max(us), max(vs)) + 1 if us else 0)

    weighted = any(w is not None for w in ws)
    weights = [1.0 if w is None else w for w in ws] if weighted else None

    g = Graph.from_edges(n, np.column_stack([us, vs]) if us else np.zeros((0, 2)), weights)
    logger.debug("Read edge list", extra={"path": str(path), "n": g.n, "edges": g.num_edges})
    return g


def write_edge_list(g: Graph, path: Union[str, Path]):
    """Write g as `u v [w]` lines with a `# n=<count>` header"""
    edges, weights = g.edge_array()
    file_path = Path(path)
    file_path.parent.mkdir(parents=True, exist_ok=True)
    with open(file_path, "w") as f:
        f.write(f"# n={g.n}\n")
        if weights is None:
            for u, v in edges:
                f.write(f"{u} {v}\n")
        else:
            for (u, v), w in zip(edges, weights):
                f.write(f"{u} {v} {w:.17g}\n")
