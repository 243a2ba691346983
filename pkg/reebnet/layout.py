"""
Reeb Net Layout

Kamada-Kawai style layout: each connected component of the net is laid
out by minimizing stress over graph-theoretic distances with weights
d^-2, using localized stress majorization. Components too large for an
all-pairs distance matrix get a pivot MDS layout instead. Components are
then tiled on a grid by decreasing size.
"""

import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Tuple

import numpy as np
from scipy.sparse import csgraph

from reebnet.reeb import ReebNet
from utils.logger import get_logger
from utils.exceptions import InvalidInputError, InvalidParameterError

logger = get_logger(__name__)

Box = Tuple[float, float, float, float]


@dataclass(frozen=True)
class LayoutParams:
    max_sweeps: int = 1000
    tolerance: float = 1e-4
    work_budget: float = 5e7
    max_exact_nodes: int = 2000
    pivots: int = 50
    margin: float = 1.0

    @classmethod
    def from_config(cls, section: Dict[str, Any]) -> "LayoutParams":
        known = {k: v for k, v in section.items() if k in cls.__dataclass_fields__ and v is not None}
        return cls(**known).validate()

    def validate(self) -> "LayoutParams":
        if self.max_sweeps < 1 or self.tolerance <= 0 or self.work_budget <= 0:
            raise InvalidParameterError(
                "Layout needs max_sweeps >= 1 and positive tolerance and work_budget",
                {"max_sweeps": self.max_sweeps, "tolerance": self.tolerance, "work_budget": self.work_budget}
            )
        return self

    def sweeps_for(self, k: int) -> int:
        """Sweep cap for a k-node component: work_budget / k^2, at least 10"""
        return int(min(self.max_sweeps, max(10, self.work_budget // max(k * k, 1))))


@dataclass
class Layout:
    """
    Node coordinates plus one bounding box per net component

    boxes[c] is (xmin, ymin, xmax, ymax) of component c, in the component
    order of ReebNet.components().
    """

    positions: np.ndarray
    boxes: List[Box] = field(default_factory=list)
    component: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "positions": [[float(x), float(y)] for x, y in self.positions],
            "boxes": [list(box) for box in self.boxes],
        }


def stress(positions: np.ndarray, dist: np.ndarray) -> float:
    """Sum over pairs of d^-2 (||x_i - x_j|| - d_ij)^2"""
    i, j = np.triu_indices(positions.shape[0], k=1)
    d = dist[i, j]
    actual = np.linalg.norm(positions[i] - positions[j], axis=1)
    return float(np.sum((actual - d) ** 2 / d ** 2))


def stress_majorization(
    dist: np.ndarray,
    rng: np.random.Generator,
    max_sweeps: int,
    tolerance: float
) -> Tuple[np.ndarray, int]:
    """
    Minimize weighted stress over a full distance matrix

    Every sweep moves each node to the weighted average of the positions
    its neighbors would place it at. Stops when no coordinate moves more
    than tolerance.

    Returns:
        Tuple (positions, sweeps run)
    """
    k = dist.shape[0]
    x = rng.uniform(-1.0, 1.0, size=(k, 2)) * max(float(dist.max()), 1.0)
    weights = np.zeros_like(dist)
    off = dist > 0
    weights[off] = dist[off] ** -2.0
    total = weights.sum(axis=1)

    for sweep in range(1, max_sweeps + 1):
        diff = x[:, None, :] - x[None, :, :]
        norm = np.linalg.norm(diff, axis=2)
        unit = np.zeros_like(diff)
        np.divide(diff, norm[:, :, None], out=unit, where=norm[:, :, None] > 0)
        target = x[None, :, :] + dist[:, :, None] * unit
        new = np.einsum("ij,ijd->id", weights, target) / total[:, None]
        new -= new.mean(axis=0)
        moved = float(np.abs(new - x).max())
        x = new
        if moved < tolerance:
            return x, sweep

    return x, max_sweeps


def pivot_mds(adj, pivots: int, rng: np.random.Generator) -> np.ndarray:
    """
    Approximate classical MDS from distances to a few pivot nodes

    Pivots are picked farthest-first from a random start.
    """
    k = adj.shape[0]
    m = min(pivots, k)
    chosen = [int(rng.integers(k))]
    cols = [csgraph.shortest_path(adj, directed=False, unweighted=True, indices=chosen[0])]
    nearest = cols[0].copy()
    while len(chosen) < m:
        nxt = int(np.argmax(nearest))
        chosen.append(nxt)
        col = csgraph.shortest_path(adj, directed=False, unweighted=True, indices=nxt)
        cols.append(col)
        nearest = np.minimum(nearest, col)

    c = np.column_stack(cols) ** 2
    c = c - c.mean(axis=0) - c.mean(axis=1, keepdims=True) + c.mean()
    c *= -0.5
    u, s, _ = np.linalg.svd(c, full_matrices=False)
    coords = u[:, :2] * s[:2]
    if coords.shape[1] < 2:
        coords = np.column_stack([coords, np.zeros(k)])
    return coords


def _layout_component(adj, params: LayoutParams, rng: np.random.Generator) -> np.ndarray:
    k = adj.shape[0]
    if k == 1:
        return np.zeros((1, 2))
    if k > params.max_exact_nodes:
        logger.warning("Large Reeb component laid out with pivot MDS", extra={"nodes": k})
        return pivot_mds(adj, params.pivots, rng)

    dist = csgraph.shortest_path(adj, directed=False, unweighted=True)
    sweeps = params.sweeps_for(k)
    positions, used = stress_majorization(dist, rng, sweeps, params.tolerance)
    if used == sweeps and sweeps < params.max_sweeps:
        logger.debug("Layout sweep budget reached", extra={"nodes": k, "sweeps": sweeps})
    return positions


def layout_reeb(reeb: ReebNet, seed: int = 0, params: LayoutParams = LayoutParams()) -> Layout:
    """
    Lay out the Reeb net

    Each component is laid out on its own with a generator seeded by
    (seed, component id), shifted to start at the origin, and tiled
    row-major on a square grid in order of decreasing node count (ties by
    component id).

    Raises:
        InvalidInputError: If the net has no nodes
    """
    params.validate()
    if reeb.num_nodes == 0:
        raise InvalidInputError("Cannot lay out an empty Reeb net")

    labeling = reeb.components()
    groups = labeling.groups()
    adj = reeb.reeb_adjacency()

    local_positions = []
    for c, members in enumerate(groups):
        rng = np.random.default_rng([seed, c])
        pos = _layout_component(adj[members][:, members], params, rng)
        local_positions.append(pos - pos.min(axis=0))

    extents = np.array([pos.max(axis=0) for pos in local_positions])
    cell = float(extents.max()) + params.margin
    columns = max(1, math.ceil(math.sqrt(len(groups))))
    order = sorted(range(len(groups)), key=lambda c: (-groups[c].size, c))

    positions = np.zeros((reeb.num_nodes, 2))
    boxes: List[Box] = [(0.0, 0.0, 0.0, 0.0)] * len(groups)
    for slot, c in enumerate(order):
        offset = np.array([(slot % columns) * cell, -(slot // columns) * cell])
        placed = local_positions[c] + offset
        positions[groups[c]] = placed
        lo, hi = placed.min(axis=0), placed.max(axis=0)
        boxes[c] = (float(lo[0]), float(lo[1]), float(hi[0]), float(hi[1]))

    logger.info("Laid out Reeb net", extra={"nodes": reeb.num_nodes, "components": len(groups)})
    return Layout(positions=positions, boxes=boxes, component=labeling.label)
