"""
Reeb Network

Assembles the Reeb network from finalized vertex sets, summarizes its
nodes, and projects it back onto a datapoint-level graph.

Two nodes are joined by an overlap edge exactly when they share a vertex.
Overlap detection uses the bipartite node/vertex incidence matrix B: nodes
i and j overlap iff (B B^T)[i, j] > 0, i.e. they are two hops apart in the
bipartite graph.
"""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import scipy.sparse as sp
from scipy.sparse import csgraph

from reebnet.graph import ComponentLabeling, Graph, VertexSet, as_vertex_set, connected_components, degrees
from utils.logger import get_logger
from utils.exceptions import DimensionMismatchError, InvalidInputError, InvalidLabelError

logger = get_logger(__name__)

REEBNET_FORMAT = "reebnet/1"

# Datapoint-level graph G^(R); same storage as any other graph.
ProjectedGraph = Graph

_EMPTY_PAIRS = np.zeros((0, 2), dtype=np.int64)


def _pairs(rows) -> np.ndarray:
    arr = np.asarray(rows, dtype=np.int64)
    return arr.reshape(-1, 2) if arr.size else _EMPTY_PAIRS.copy()


@dataclass
class ReebNet:
    """
    Reeb network over the vertices of a graph

    Attributes:
        nodes: One VertexSet per Reeb node
        overlap_edges: (e, 2) node pairs i < j that share a vertex
        extra_edges: (x, 2) node pairs i < j added by component merging
        extra_bridges: (x, 2) datapoint edge (u, v) realizing each extra edge;
            u lies in the node of extra_edges[k, 0]
        excluded: Vertices dropped with unmergeable components
        n: Vertex count of the underlying graph
        paths: Per-node provenance (split path or mapper cell)
    """

    nodes: List[VertexSet]
    overlap_edges: np.ndarray = field(default_factory=lambda: _EMPTY_PAIRS.copy())
    extra_edges: np.ndarray = field(default_factory=lambda: _EMPTY_PAIRS.copy())
    extra_bridges: np.ndarray = field(default_factory=lambda: _EMPTY_PAIRS.copy())
    excluded: VertexSet = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    n: int = 0
    paths: List[Tuple] = field(default_factory=list)

    def __post_init__(self):
        self.overlap_edges = _pairs(self.overlap_edges)
        self.extra_edges = _pairs(self.extra_edges)
        self.extra_bridges = _pairs(self.extra_bridges)
        self.excluded = as_vertex_set(self.excluded)
        if not self.paths:
            self.paths = [() for _ in self.nodes]

    @property
    def num_nodes(self) -> int:
        return len(self.nodes)

    def sizes(self) -> np.ndarray:
        return np.array([s.size for s in self.nodes], dtype=np.int64)

    def all_edges(self) -> np.ndarray:
        """Overlap edges followed by extra edges"""
        return np.concatenate([self.overlap_edges, self.extra_edges])

    def reeb_graph(self) -> Graph:
        """The net itself as a graph over node ids"""
        edges = self.all_edges()
        return Graph.from_pairs(self.num_nodes, edges[:, 0], edges[:, 1])

    def reeb_adjacency(self) -> sp.csr_matrix:
        return self.reeb_graph().adjacency()

    def components(self) -> ComponentLabeling:
        """Components of the net under overlap and extra edges"""
        return connected_components(self.reeb_graph())

    def covered(self) -> VertexSet:
        if not self.nodes:
            return np.zeros(0, dtype=np.int64)
        return np.unique(np.concatenate(self.nodes))

    def incidence(self) -> sp.csr_matrix:
        """k x n node/vertex incidence matrix"""
        return incidence_matrix(self.nodes, self.n)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "format": REEBNET_FORMAT,
            "n": int(self.n),
            "nodes": [s.tolist() for s in self.nodes],
            "paths": [[list(step) for step in path] for path in self.paths],
            "overlap_edges": self.overlap_edges.tolist(),
            "extra_edges": self.extra_edges.tolist(),
            "extra_bridges": self.extra_bridges.tolist(),
            "excluded": self.excluded.tolist(),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ReebNet":
        return cls(
            nodes=[np.asarray(s, dtype=np.int64) for s in data["nodes"]],
            overlap_edges=data.get("overlap_edges", []),
            extra_edges=data.get("extra_edges", []),
            extra_bridges=data.get("extra_bridges", []),
            excluded=data.get("excluded", []),
            n=int(data["n"]),
            paths=[tuple(tuple(step) for step in path) for path in data.get("paths", [])],
        )


@dataclass
class NodeSummary:
    """Member count and class mixture of one Reeb node"""

    size: int
    mixture: np.ndarray
    dominant: Optional[int]
    empty: bool = False

    def to_dict(self) -> Dict[str, Any]:
        return {
            "size": int(self.size),
            "mixture": [float(x) for x in self.mixture],
            "dominant": self.dominant,
            "empty": self.empty,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "NodeSummary":
        return cls(
            size=int(data["size"]),
            mixture=np.asarray(data["mixture"], dtype=np.float64),
            dominant=data.get("dominant"),
            empty=bool(data.get("empty", False)),
        )


def incidence_matrix(nodes: Sequence[VertexSet], n: int) -> sp.csr_matrix:
    sizes = np.array([s.size for s in nodes], dtype=np.int64)
    rows = np.repeat(np.arange(len(nodes), dtype=np.int64), sizes)
    cols = np.concatenate(nodes) if len(nodes) else np.zeros(0, dtype=np.int64)
    return sp.csr_matrix((np.ones(cols.size), (rows, cols)), shape=(len(nodes), n))


def overlap_pairs(nodes: Sequence[VertexSet], n: int) -> np.ndarray:
    """Node pairs i < j sharing at least one vertex, in row-major order"""
    if len(nodes) < 2:
        return _EMPTY_PAIRS.copy()
    b = incidence_matrix(nodes, n)
    shared = sp.triu(b @ b.T, k=1).tocoo()
    keep = shared.data > 0
    pairs = np.column_stack([shared.row[keep], shared.col[keep]]).astype(np.int64)
    return pairs[np.lexsort((pairs[:, 1], pairs[:, 0]))]


def build_reeb_net(f_sets) -> ReebNet:
    """
    Build the Reeb net of finalized sets: one node per set, an edge per overlap

    Args:
        f_sets: FinalSets (or any object with .sets, .n and .paths)

    Returns:
        ReebNet with no extra edges and nothing excluded

    Raises:
        InvalidInputError: If there are no sets
    """
    nodes = [as_vertex_set(s) for s in f_sets.sets]
    if not nodes:
        raise InvalidInputError("Cannot build a Reeb net from zero sets")

    reeb = ReebNet(
        nodes=nodes,
        overlap_edges=overlap_pairs(nodes, f_sets.n),
        n=f_sets.n,
        paths=list(getattr(f_sets, "paths", [])),
    )
    logger.info(
        "Built Reeb net",
        extra={"nodes": reeb.num_nodes, "overlap_edges": int(reeb.overlap_edges.shape[0])}
    )
    return reeb


def _shares_node(reeb: ReebNet, u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Boolean per pair: some node contains both u and v"""
    if u.size == 0 or reeb.num_nodes == 0:
        return np.zeros(u.size, dtype=bool)
    bt = reeb.incidence().T.tocsr()
    common = bt[u].multiply(bt[v]).sum(axis=1)
    return np.asarray(common).ravel() > 0


def project(reeb: ReebNet, g: Graph) -> ProjectedGraph:
    """
    Project the Reeb net back onto the datapoints

    G^(R) keeps every g-edge internal to some Reeb node and adds the
    recorded datapoint bridge of every extra edge. Weights of g carry over.

    Raises:
        DimensionMismatchError: If reeb and g disagree on n
    """
    if reeb.n != g.n:
        raise DimensionMismatchError(
            "Reeb net and graph disagree on vertex count",
            {"reeb_n": reeb.n, "graph_n": g.n}
        )

    edges, weights = g.edge_array()
    keep = _shares_node(reeb, edges[:, 0], edges[:, 1])
    u, v = edges[keep, 0], edges[keep, 1]
    w = weights[keep] if weights is not None else None

    bridges = reeb.extra_bridges
    if bridges.shape[0]:
        u = np.concatenate([u, bridges[:, 0]])
        v = np.concatenate([v, bridges[:, 1]])
        if w is not None:
            adj = g.adjacency()
            bridge_w = np.asarray(adj[bridges[:, 0], bridges[:, 1]]).ravel()
            w = np.concatenate([w, bridge_w])

    proj = Graph.from_pairs(g.n, u, v, w)
    logger.info(
        "Projected Reeb net",
        extra={"edges": proj.num_edges, "graph_edges": g.num_edges, "bridges": int(bridges.shape[0])}
    )
    return proj


def summarize(
    reeb: ReebNet,
    labels: np.ndarray,
    mode: str = "predicted",
    num_classes: Optional[int] = None
) -> List[NodeSummary]:
    """
    Class mixture of each Reeb node

    Args:
        reeb: Reeb net
        labels: Per-vertex class; negative means undefined
        mode: "predicted" (every member must be labeled) or "training"
            (unlabeled members are ignored; nodes without any are flagged empty)
        num_classes: Mixture length; defaults to max label + 1

    Raises:
        InvalidLabelError: On undefined predicted labels or an unknown mode
    """
    if mode not in ("predicted", "training"):
        raise InvalidLabelError(f"Unknown summary mode: {mode}", {"mode": mode})

    labels = np.asarray(labels, dtype=np.int64)
    if labels.shape[0] != reeb.n:
        raise DimensionMismatchError(
            "Label count does not match vertex count",
            {"labels": int(labels.shape[0]), "n": reeb.n}
        )
    m = num_classes if num_classes is not None else int(max(labels.max(initial=-1) + 1, 1))
    if labels.size and labels.max() >= m:
        raise InvalidLabelError(
            "Class index outside [0, num_classes)",
            {"max_label": int(labels.max()), "num_classes": m}
        )

    summaries = []
    for i, members in enumerate(reeb.nodes):
        member_labels = labels[members]
        if mode == "predicted" and np.any(member_labels < 0):
            raise InvalidLabelError(
                "Predicted labels must be defined on every Reeb node member",
                {"node": i}
            )
        member_labels = member_labels[member_labels >= 0]
        counts = np.bincount(member_labels, minlength=m).astype(np.float64)[:m]
        total = counts.sum()
        if total == 0:
            summaries.append(NodeSummary(size=int(members.size), mixture=np.zeros(m), dominant=None, empty=True))
            continue
        mixture = counts / total
        summaries.append(NodeSummary(size=int(members.size), mixture=mixture, dominant=int(np.argmax(mixture))))

    return summaries


def closest_members(reeb: ReebNet, proj: ProjectedGraph) -> Dict[Tuple[int, int], Tuple[int, int]]:
    """
    For each Reeb edge (i, j), the member of i closest to node j and vice versa

    Distances are hop counts inside the subgraph of G^(R) induced by the two
    nodes' members; shared vertices are at distance 0. Ties go to the member
    with larger G^(R) degree, then the smaller id.
    """
    deg = degrees(proj)
    adj = proj.adjacency()
    result = {}

    def pick(candidates: VertexSet, targets: VertexSet, local: VertexSet, sub) -> int:
        src = np.searchsorted(local, targets)
        dist = csgraph.dijkstra(sub, directed=False, unweighted=True, indices=src, min_only=True)
        cand_dist = dist[np.searchsorted(local, candidates)]
        order = np.lexsort((candidates, -deg[candidates], cand_dist))
        return int(candidates[order[0]])

    for i, j in reeb.all_edges():
        a, b = reeb.nodes[i], reeb.nodes[j]
        local = np.union1d(a, b)
        sub = adj[local][:, local]
        result[(int(i), int(j))] = (pick(a, b, local, sub), pick(b, a, local, sub))

    return result
