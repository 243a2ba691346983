"""
Classic Mapper Baseline

Tensor-product interval cover over all lenses, clustering by connected
components of each cell's induced subgraph, Reeb edges by shared points.
Used to contrast GTDA against the fixed-bin construction it replaces.
"""

from dataclasses import dataclass
from typing import Any, Dict, List, Tuple

import numpy as np

from reebnet.graph import Graph, VertexSet, connected_components
from reebnet.lens import LensMatrix
from reebnet.reeb import ReebNet, overlap_pairs
from utils.helpers import parallel_map
from utils.logger import get_logger
from utils.exceptions import InvalidInputError, InvalidParameterError

logger = get_logger(__name__)

Cell = Tuple[Tuple[int, ...], VertexSet]


@dataclass(frozen=True)
class MapperParams:
    """Equal-width bins per lens, each widened on both sides by overlap_fraction of its width"""

    bins_per_lens: int = 10
    overlap_fraction: float = 0.1

    @classmethod
    def from_config(cls, section: Dict[str, Any], **overrides) -> "MapperParams":
        values = {k: section[k] for k in ("bins_per_lens", "overlap_fraction") if section.get(k) is not None}
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values).validate()

    def validate(self) -> "MapperParams":
        if self.bins_per_lens < 1:
            raise InvalidParameterError("bins_per_lens must be at least 1", {"bins_per_lens": self.bins_per_lens})
        if not 0.0 <= self.overlap_fraction < 1.0:
            raise InvalidParameterError(
                "overlap_fraction must lie in [0, 1)",
                {"overlap_fraction": self.overlap_fraction}
            )
        return self


def bin_membership(values: np.ndarray, params: MapperParams) -> np.ndarray:
    """
    n x bins boolean membership of normalized values

    Bin j covers [(j - o) / b, (j + 1 + o) / b); the last bin is closed on
    the right so 1.0 is always covered. The widened right edge itself is
    left to the next bin, which keeps zero-overlap bins a partition: with
    2 bins and o = 0.2, 0.6 is in bin 1 only.
    """
    b, o = params.bins_per_lens, params.overlap_fraction
    j = np.arange(b)
    lo = (j - o) / b
    hi = (j + 1 + o) / b
    v = values[:, None]
    member = (v >= lo) & (v < hi)
    member[:, -1] |= values >= lo[-1]
    return member


def mapper_cover(p: LensMatrix, params: MapperParams) -> List[Cell]:
    """
    Nonempty cells of the tensor-product cover

    Returns:
        (bin id tuple, VertexSet) pairs in lexicographic bin-id order

    Raises:
        InvalidInputError: If lens values fall outside [0, 1]
    """
    params.validate()
    if p.n and (p.values.min() < 0.0 or p.values.max() > 1.0):
        raise InvalidInputError(
            "Mapper lenses must be normalized to [0, 1]",
            {"min": float(p.values.min()), "max": float(p.values.max())}
        )

    memberships = [bin_membership(p.values[:, c], params) for c in range(p.m)]
    cells = {}
    for i in range(p.n):
        per_lens = [np.flatnonzero(mem[i]) for mem in memberships]
        grids = np.meshgrid(*per_lens, indexing="ij")
        for key in zip(*(grid.ravel() for grid in grids)):
            cells.setdefault(tuple(int(x) for x in key), []).append(i)

    cover = [(key, np.asarray(cells[key], dtype=np.int64)) for key in sorted(cells)]
    logger.debug("Built mapper cover", extra={"cells": len(cover), "lenses": p.m, "bins": params.bins_per_lens})
    return cover


def mapper_reeb(g: Graph, cover: List[Cell], workers: int = 1) -> ReebNet:
    """
    One Reeb node per connected component of each cell, edges by shared points

    Nodes come in cell order, then component order within a cell.
    """
    per_cell = parallel_map(lambda cell: connected_components(g, cell[1]).groups(), cover, workers)

    nodes: List[VertexSet] = []
    paths = []
    for (key, _), comps in zip(cover, per_cell):
        for comp in comps:
            nodes.append(comp)
            paths.append(tuple((lens, b) for lens, b in enumerate(key)))

    reeb = ReebNet(nodes=nodes, overlap_edges=overlap_pairs(nodes, g.n), n=g.n, paths=paths)
    logger.info(
        "Built mapper Reeb net",
        extra={"cells": len(cover), "nodes": reeb.num_nodes, "edges": int(reeb.overlap_edges.shape[0])}
    )
    return reeb


def count_small_components(reeb: ReebNet, threshold: int = 1) -> int:
    """Number of Reeb components with at most threshold nodes"""
    if reeb.num_nodes == 0:
        return 0
    labeling = reeb.components()
    sizes = np.bincount(labeling.label, minlength=labeling.count)
    return int(np.sum(sizes <= threshold))
