"""
Recursive Lens Splitter

The bisection loop that turns a graph and its smoothed lenses into the
finalized vertex sets that become Reeb network nodes. Oversized connected
sets are split at the midpoint of their widest lens into two overlapping
bins (only the left bin is extended, by the overlap ratio), re-split into
connected components, and requeued until every set is small enough or
flat enough.
"""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from reebnet.graph import Graph, VertexSet, as_vertex_set, connected_components
from reebnet.lens import LensMatrix, SmoothingParams, lens_spreads, max_diff_lens
from utils.helpers import parallel_map
from utils.logger import get_logger
from utils.exceptions import DimensionMismatchError, InvalidParameterError, ZeroSpreadError

logger = get_logger(__name__)

LEFT = "L"
RIGHT = "R"

SplitPath = Tuple[Tuple[int, str], ...]


@dataclass(frozen=True)
class GtdaParams:
    """
    GTDA parameters

    Attributes:
        max_size: K, sets with at most this many vertices stop splitting
        min_diff: d, sets whose widest lens spread is at most d stop splitting
        overlap: r, fraction of the split interval added to the left bin
        min_node: s1, Reeb nodes with at most this many vertices get merged
        min_component: s2, Reeb components with at most this many nodes get connected
        alpha: lens smoothing weight
        smooth_steps: S, lens smoothing steps
        merge_distance: name of the merge distance f
    """

    max_size: int
    min_diff: float = 0.0
    overlap: float = 0.01
    min_node: int = 5
    min_component: int = 5
    alpha: float = 0.5
    smooth_steps: int = 5
    merge_distance: str = "linf"

    FIELDS = ("max_size", "min_diff", "overlap", "min_node", "min_component",
              "alpha", "smooth_steps", "merge_distance")

    @classmethod
    def from_config(cls, section: Dict[str, Any], **overrides) -> "GtdaParams":
        """Build from a config section; non-None overrides win"""
        values = {key: section[key] for key in cls.FIELDS if section.get(key) is not None}
        values.update({key: val for key, val in overrides.items() if val is not None})
        if values.get("max_size") is None:
            raise InvalidParameterError("max_size (K) is required", {"parameter": "max_size"})
        return cls(**values).validate()

    @property
    def smoothing(self) -> SmoothingParams:
        return SmoothingParams(alpha=self.alpha, steps=self.smooth_steps)

    def validate(self) -> "GtdaParams":
        checks = [
            (self.max_size >= 1, "max_size (K) must be at least 1"),
            (self.min_diff >= 0, "min_diff (d) must be nonnegative"),
            (0 <= self.overlap < 1, "overlap (r) must lie in [0, 1)"),
            (self.min_node >= 1, "min_node (s1) must be at least 1"),
            (self.min_component >= 1, "min_component (s2) must be at least 1"),
        ]
        for ok, message in checks:
            if not ok:
                raise InvalidParameterError(message, {"params": self.to_dict()})
        self.smoothing.validate()
        return self

    def to_dict(self) -> Dict[str, Any]:
        return {key: getattr(self, key) for key in self.FIELDS}


@dataclass
class FinalSets:
    """
    Finalized vertex sets and their provenance

    paths[i] lists the (lens index, side) choices that produced sets[i];
    generations[i] is the splitting generation that created it.
    """

    sets: List[VertexSet]
    paths: List[SplitPath]
    generations: List[int]
    n: int
    num_generations: int = 0
    forced: List[int] = field(default_factory=list)
    unmergeable: List[int] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.sets)

    def __iter__(self):
        return iter(self.sets)

    def sizes(self) -> np.ndarray:
        return np.array([s.size for s in self.sets], dtype=np.int64)


@dataclass
class _Pending:
    vertices: VertexSet
    path: SplitPath
    generation: int


def _bins(values: np.ndarray, r: float) -> Tuple[np.ndarray, np.ndarray]:
    lo, hi = values.min(), values.max()
    span = hi - lo
    left = values <= lo + (0.5 + r) * span
    right = values > lo + 0.5 * span
    return left, right


def _split_sides(g: Graph, p: LensMatrix, s: VertexSet, c: int, r: float) -> List[Tuple[VertexSet, str]]:
    values = p.values[s, c]
    if values.max() <= values.min():
        raise ZeroSpreadError(
            "Cannot split along a lens with zero spread",
            {"lens": int(c), "size": int(s.size)}
        )
    left, right = _bins(values, r)
    children = []
    for side, mask in ((LEFT, left), (RIGHT, right)):
        for comp in connected_components(g, s[mask]).groups():
            children.append((comp, side))
    return children


def split_once(g: Graph, p: LensMatrix, s: VertexSet, c: int, r: float) -> List[VertexSet]:
    """
    Split s along lens c into two overlapping bins and re-component them

    The left bin holds values <= min + (0.5 + r)(max - min), the right bin
    values > min + 0.5 (max - min). Left-bin components come first.

    Raises:
        ZeroSpreadError: If lens c is constant on s
    """
    s = as_vertex_set(s, g.n)
    return [comp for comp, _ in _split_sides(g, p, s, c, r)]


def gtda_split(
    g: Graph,
    p_smoothed: LensMatrix,
    params: GtdaParams,
    workers: int = 1
) -> FinalSets:
    """
    Run the recursive splitting loop

    The worklist starts as the connected components of g. Sets with more
    than K vertices whose widest lens spread exceeds d are split along
    their widest lens; everything else is finalized. Sets of one generation
    are split concurrently when workers > 1.

    Args:
        g: Graph
        p_smoothed: Smoothed, min-max normalized lenses
        params: GTDA parameters
        workers: Worker threads per generation

    Returns:
        FinalSets sorted by (creation generation, smallest vertex id)
    """
    params.validate()
    if p_smoothed.n != g.n:
        raise DimensionMismatchError(
            "Lens rows do not match graph size",
            {"lens_rows": p_smoothed.n, "graph_vertices": g.n}
        )

    K, d, r = params.max_size, params.min_diff, params.overlap

    def keep_splitting(s: VertexSet) -> bool:
        return s.size > K and float(lens_spreads(p_smoothed, s).max()) > d

    finalized: List[_Pending] = []
    final_keys = set()
    forced_keys = set()

    def finalize(entry: _Pending, forced: bool = False):
        key = entry.vertices.tobytes()
        if key in final_keys:
            return
        final_keys.add(key)
        finalized.append(entry)
        if forced:
            forced_keys.add(key)

    worklist: List[_Pending] = []
    for comp in connected_components(g).groups():
        entry = _Pending(comp, (), 0)
        if keep_splitting(comp):
            worklist.append(entry)
        else:
            finalize(entry)

    def split_entry(entry: _Pending):
        c = max_diff_lens(p_smoothed, entry.vertices)
        return c, _split_sides(g, p_smoothed, entry.vertices, c, r)

    generation = 0
    while worklist:
        generation += 1
        current, worklist = worklist, []
        queued = set()

        for parent, (c, children) in zip(current, parallel_map(split_entry, current, workers)):
            for child, side in children:
                entry = _Pending(child, parent.path + ((c, side),), generation)
                if not keep_splitting(child):
                    finalize(entry)
                elif child.size == parent.vertices.size:
                    # the child is its parent again: no progress possible
                    logger.warning(
                        "Split made no progress, finalizing oversized set",
                        extra={"size": int(child.size), "lens": int(c), "generation": generation}
                    )
                    finalize(entry, forced=True)
                elif child.tobytes() not in queued:
                    queued.add(child.tobytes())
                    worklist.append(entry)

        logger.debug(
            "Split generation finished",
            extra={"generation": generation, "split": len(current), "queued": len(worklist)}
        )

    finalized.sort(key=lambda e: (e.generation, int(e.vertices[0]) if e.vertices.size else -1, e.vertices.size))

    result = FinalSets(
        sets=[e.vertices for e in finalized],
        paths=[e.path for e in finalized],
        generations=[e.generation for e in finalized],
        n=g.n,
        num_generations=generation,
        forced=[i for i, e in enumerate(finalized) if e.vertices.tobytes() in forced_keys],
    )

    logger.info(
        "Splitting finished",
        extra={
            "finalized_sets": len(result),
            "generations": generation,
            "forced": len(result.forced),
        }
    )
    return result
