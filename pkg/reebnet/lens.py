"""
Prediction Lenses

Holds the n x m lens matrix (one column per lens, typically the per-class
prediction probabilities) and implements graph smoothing, column min-max
normalization, widest-lens selection and the l-infinity merge distance.
"""

import csv
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, List, Union

import numpy as np
import scipy.sparse as sp

from reebnet.graph import Graph, VertexSet, transition_matrix
from utils.logger import get_logger
from utils.exceptions import (
    DimensionMismatchError,
    InputFileNotFoundError,
    InputFormatError,
    InvalidInputError,
    InvalidParameterError,
    NonFiniteLensError,
)

logger = get_logger(__name__)

# f(u_ids, v_ids) -> distances, elementwise over paired vertex arrays
MergeDistance = Callable[[np.ndarray, np.ndarray], np.ndarray]


@dataclass
class LensMatrix:
    """n x m matrix of lens values with one name per column"""

    values: np.ndarray
    column_names: List[str] = field(default_factory=list)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim == 1:
            values = values.reshape(-1, 1)
        if values.ndim != 2:
            raise InvalidInputError("Lens matrix must be two-dimensional", {"ndim": values.ndim})
        self.values = values
        if not self.column_names:
            self.column_names = [f"lens_{i}" for i in range(values.shape[1])]
        if len(self.column_names) != values.shape[1]:
            raise DimensionMismatchError(
                "Column name count does not match lens count",
                {"names": len(self.column_names), "lenses": values.shape[1]}
            )

    @property
    def n(self) -> int:
        return int(self.values.shape[0])

    @property
    def m(self) -> int:
        return int(self.values.shape[1])

    def with_values(self, values: np.ndarray) -> "LensMatrix":
        return LensMatrix(values=values, column_names=list(self.column_names))


@dataclass(frozen=True)
class SmoothingParams:
    """Diffusion weight alpha in (0, 1) and number of steps"""

    alpha: float = 0.5
    steps: int = 5

    def validate(self) -> "SmoothingParams":
        if not 0.0 < self.alpha < 1.0:
            raise InvalidParameterError("alpha must lie in (0, 1)", {"alpha": self.alpha})
        if self.steps < 0:
            raise InvalidParameterError("steps must be nonnegative", {"steps": self.steps})
        return self


def require_finite(p: LensMatrix):
    if not np.all(np.isfinite(p.values)):
        bad = np.argwhere(~np.isfinite(p.values))[0]
        raise NonFiniteLensError(
            "Lens matrix contains non-finite entries",
            {"row": int(bad[0]), "column": int(bad[1])}
        )


def diffuse(
    walk: sp.csr_matrix,
    seed: np.ndarray,
    alpha: float,
    steps: int,
    workers: int = 1
) -> np.ndarray:
    """
    Iterate X(i+1) = (1 - alpha) * seed + alpha * walk @ X(i) from X(0) = seed

    Columns are independent, so with workers > 1 column blocks run
    concurrently; the result does not depend on the worker count.
    """
    seed = np.asarray(seed, dtype=np.float64)

    def run(block: np.ndarray) -> np.ndarray:
        current = block.copy()
        for _ in range(steps):
            current = (1.0 - alpha) * block + alpha * (walk @ current)
        return current

    if workers <= 1 or seed.shape[1] < 2:
        return run(seed)

    blocks = np.array_split(np.arange(seed.shape[1]), min(workers, seed.shape[1]))
    with ThreadPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(lambda cols: run(seed[:, cols]), blocks))
    return np.hstack(parts)


def smooth(p: LensMatrix, g: Graph, params: SmoothingParams, workers: int = 1) -> LensMatrix:
    """
    Smooth lenses over the graph for params.steps steps

    P(i+1) = (1 - alpha) P + alpha D^-1 A P(i), P(0) = P. Isolated vertices
    are fixed points.

    Raises:
        DimensionMismatchError: If p and g disagree on n
        NonFiniteLensError: If p has non-finite entries
    """
    params.validate()
    if p.n != g.n:
        raise DimensionMismatchError(
            "Lens rows do not match graph size",
            {"lens_rows": p.n, "graph_vertices": g.n}
        )
    require_finite(p)

    if params.steps == 0:
        return p.with_values(p.values.copy())

    smoothed = diffuse(transition_matrix(g), p.values, params.alpha, params.steps, workers)
    logger.debug("Smoothed lenses", extra={"lenses": p.m, "steps": params.steps, "alpha": params.alpha})
    return p.with_values(smoothed)


def minmax_normalize(p: LensMatrix) -> LensMatrix:
    """Rescale each column to [0, 1]; constant columns become all zeros"""
    require_finite(p)
    lo = p.values.min(axis=0) if p.n else np.zeros(p.m)
    hi = p.values.max(axis=0) if p.n else np.zeros(p.m)
    span = hi - lo
    scale = np.zeros_like(span)
    np.divide(1.0, span, out=scale, where=span > 0)
    return p.with_values((p.values - lo) * scale)


def lens_spreads(p: LensMatrix, s: VertexSet) -> np.ndarray:
    """max - min of every lens over the rows in s"""
    sub = p.values[s]
    return sub.max(axis=0) - sub.min(axis=0)


def max_diff_lens(p: LensMatrix, s: VertexSet) -> int:
    """
    Lens with the largest max - min difference on s

    Ties go to the smallest column index.

    Raises:
        InvalidInputError: If s is empty
    """
    if len(s) == 0:
        raise InvalidInputError("Cannot pick a lens for an empty vertex set")
    return int(np.argmax(lens_spreads(p, s)))


def lens_distance(p_smoothed: LensMatrix, u: int, v: int) -> float:
    """l-infinity distance between rows u and v"""
    return float(np.max(np.abs(p_smoothed.values[u] - p_smoothed.values[v])))


class LInfDistance:
    """Vectorized l-infinity row distance, the default merge distance"""

    name = "linf"

    def __init__(self, p_smoothed: LensMatrix):
        self.values = p_smoothed.values

    def __call__(self, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        u = np.asarray(u, dtype=np.int64)
        v = np.asarray(v, dtype=np.int64)
        if u.size == 0:
            return np.zeros(0)
        return np.abs(self.values[u] - self.values[v]).max(axis=1)


MERGE_DISTANCES = {
    "linf": LInfDistance,
}


def make_merge_distance(name: str, p_smoothed: LensMatrix) -> MergeDistance:
    """Resolve a configured merge distance name"""
    try:
        return MERGE_DISTANCES[name](p_smoothed)
    except KeyError:
        raise InvalidParameterError(
            f"Unknown merge distance: {name}",
            {"merge_distance": name, "available": sorted(MERGE_DISTANCES)}
        )


def read_lens_csv(path: Union[str, Path]) -> LensMatrix:
    """
    Read a lens CSV: header row of column names, one datapoint per row

    Raises:
        InputFileNotFoundError: If the file does not exist
        InputFormatError: If values cannot be parsed as reals
        NonFiniteLensError: If any value is NaN or infinite
    """
    file_path = Path(path)
    if not file_path.exists():
        raise InputFileNotFoundError(f"Lens file not found: {path}", {"path": str(path)})

    with open(file_path, "r", newline="") as f:
        reader = csv.reader(f)
        try:
            header = [name.strip() for name in next(reader)]
        except StopIteration:
            raise InputFormatError(f"Lens file is empty: {path}", {"path": str(path)})
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != len(header):
                raise InputFormatError(
                    f"Line {lineno} of {path} has {len(row)} values, expected {len(header)}",
                    {"path": str(path), "line": lineno}
                )
            try:
                rows.append([float(cell) for cell in row])
            except ValueError:
                raise InputFormatError(
                    f"Non-numeric lens value on line {lineno} of {path}",
                    {"path": str(path), "line": lineno}
                )

    values = np.asarray(rows, dtype=np.float64).reshape(len(rows), len(header))
    lens = LensMatrix(values=values, column_names=header)
    require_finite(lens)
    logger.debug("Read lens matrix", extra={"path": str(path), "n": lens.n, "m": lens.m})
    return lens


def write_lens_csv(p: LensMatrix, path: Union[str, Path]):
    file_path = Path(path)
    file_path.parent.mkdir(parents=True, exist_ok=True)
    np.savetxt(file_path, p.values, fmt="%.17g", delimiter=",", header=",".join(p.column_names), comments="")
