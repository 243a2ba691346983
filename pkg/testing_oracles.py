"""
Brute-force oracles and random instance generators shared by the tests

Every oracle here is the slow, obviously-correct version of something the
library does fast: BFS flood fill, pairwise set intersection, dense matrix
powers, pairwise AUC, exhaustive kNN and per-point interval scans.
"""

from collections import deque
from itertools import combinations
from typing import List, Set, Tuple

import numpy as np
from hypothesis import strategies as st

from reebnet.graph import Graph
from reebnet.lens import LensMatrix


def random_graph(rng: np.random.Generator, n: int, p: float, weighted: bool = False) -> Graph:
    """Erdos-Renyi graph G(n, p)"""
    iu, ju = np.triu_indices(n, k=1)
    keep = rng.random(iu.size) < p
    edges = np.column_stack([iu[keep], ju[keep]])
    weights = rng.uniform(0.1, 2.0, size=edges.shape[0]) if weighted else None
    return Graph.from_edges(n, edges, weights)


def path_graph(n: int) -> Graph:
    return Graph.from_edges(n, [(i, i + 1) for i in range(n - 1)])


def lattice_knn_graph(n: int, k: int = 5) -> Graph:
    """Ring where every vertex links to its next ceil(k / 2) successors"""
    reach = (k + 1) // 2
    base = np.arange(n)
    u = np.tile(base, reach)
    v = np.concatenate([(base + step) % n for step in range(1, reach + 1)])
    return Graph.from_pairs(n, u, v)


def edge_set(g: Graph) -> Set[Tuple[int, int]]:
    edges, _ = g.edge_array()
    return {(int(u), int(v)) for u, v in edges}


def bfs_components(g: Graph, restrict=None) -> List[Set[int]]:
    """Flood fill over the (restricted) graph"""
    allowed = set(range(g.n)) if restrict is None else {int(x) for x in restrict}
    seen: Set[int] = set()
    components = []
    for start in sorted(allowed):
        if start in seen:
            continue
        comp = {start}
        seen.add(start)
        queue = deque([start])
        while queue:
            u = queue.popleft()
            for v in g.neighbors(u):
                v = int(v)
                if v in allowed and v not in seen:
                    seen.add(v)
                    comp.add(v)
                    queue.append(v)
        components.append(comp)
    return components


def is_connected_set(g: Graph, s) -> bool:
    return len(bfs_components(g, s)) == 1


def pairwise_overlaps(nodes) -> Set[Tuple[int, int]]:
    sets = [set(int(x) for x in s) for s in nodes]
    return {(i, j) for i, j in combinations(range(len(sets)), 2) if sets[i] & sets[j]}


def dense_walk(g: Graph) -> np.ndarray:
    a = g.adjacency().toarray()
    deg = a.sum(axis=1)
    walk = np.zeros_like(a)
    for i in range(g.n):
        if deg[i] > 0:
            walk[i] = a[i] / deg[i]
        else:
            walk[i, i] = 1.0
    return walk


def dense_diffusion(g: Graph, x0: np.ndarray, alpha: float, steps: int) -> np.ndarray:
    """Closed form: sum_k (1-alpha) alpha^k W^k X0 plus alpha^S W^S X0"""
    walk = dense_walk(g)
    power = np.eye(g.n)
    total = np.zeros_like(x0, dtype=np.float64)
    for k in range(steps):
        total += (1 - alpha) * alpha ** k * power @ x0
        power = walk @ power
    return total + alpha ** steps * power @ x0


def pairwise_auc(scores, truth) -> float:
    scores = np.asarray(scores, dtype=np.float64)
    truth = np.asarray(truth, dtype=bool)
    pos, neg = scores[truth], scores[~truth]
    wins = 0.0
    for a in pos:
        wins += float(np.sum(a > neg)) + 0.5 * float(np.sum(a == neg))
    return wins / (pos.size * neg.size)


def exhaustive_knn(values: np.ndarray, k: int, metric: str) -> Set[Tuple[int, int]]:
    """Union-symmetrized kNN edges, ties to the smaller index"""
    n = values.shape[0]
    if metric == "cosine":
        norms = np.linalg.norm(values, axis=1, keepdims=True)
        unit = np.divide(values, norms, out=np.zeros_like(values), where=norms > 0)
    edges = set()
    for i in range(n):
        dists = []
        for j in range(n):
            if i == j:
                continue
            if metric == "euclidean":
                d = float(np.sqrt(np.sum((values[i] - values[j]) ** 2)))
            else:
                d = float(1.0 - unit[i] @ unit[j])
            dists.append((d, j))
        for _, j in sorted(dists)[:min(k, n - 1)]:
            edges.add((min(i, j), max(i, j)))
    return edges


def interval_cells(values: np.ndarray, bins: int, overlap: float):
    """Per point, every tuple of bin ids whose widened interval holds it"""
    n, m = values.shape
    cells = {}
    for i in range(n):
        per_lens = []
        for c in range(m):
            x = values[i, c]
            hits = []
            for j in range(bins):
                lo = (j - overlap) / bins
                hi = (j + 1 + overlap) / bins
                if lo <= x < hi or (j == bins - 1 and x >= lo):
                    hits.append(j)
            per_lens.append(hits)
        keys = [()]
        for hits in per_lens:
            keys = [key + (h,) for key in keys for h in hits]
        for key in keys:
            cells.setdefault(key, set()).add(i)
    return cells


@st.composite
def graphs(draw, min_n: int = 1, max_n: int = 25, weighted: bool = False) -> Graph:
    """Random simple graph; vertex count and edge subset drawn by hypothesis"""
    n = draw(st.integers(min_value=min_n, max_value=max_n))
    possible = [(i, j) for i in range(n) for j in range(i + 1, n)]
    edges = draw(st.lists(st.sampled_from(possible), unique=True, max_size=3 * n)) if possible else []
    weights = None
    if weighted:
        weights = draw(st.lists(
            st.floats(min_value=0.1, max_value=5.0, allow_nan=False),
            min_size=len(edges), max_size=len(edges)
        ))
    return Graph.from_edges(n, np.asarray(edges, dtype=np.int64).reshape(-1, 2), weights)


@st.composite
def graphs_with_lens(draw, min_n: int = 2, max_n: int = 25, max_lenses: int = 3):
    """A graph plus an n x m lens matrix in [0, 1]"""
    g = draw(graphs(min_n=min_n, max_n=max_n))
    m = draw(st.integers(min_value=1, max_value=max_lenses))
    cells = draw(st.lists(
        st.floats(min_value=0.0, max_value=1.0, allow_nan=False),
        min_size=g.n * m, max_size=g.n * m
    ))
    return g, LensMatrix(values=np.asarray(cells, dtype=np.float64).reshape(g.n, m))
