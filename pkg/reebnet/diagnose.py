"""
Prediction Diagnostics

Diffusion-based error estimation on the projected graph, the
model-uncertainty baseline, binary label correction and ROC AUC scoring,
plus the CSV/JSON files these results are exchanged through.
"""

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Optional, Union

import numpy as np
from sklearn.metrics import roc_auc_score

from reebnet.graph import Graph, transition_matrix
from reebnet.lens import diffuse
from utils.helpers import save_json
from utils.logger import get_logger
from utils.exceptions import (
    DegenerateTruthError,
    DimensionMismatchError,
    InputFileNotFoundError,
    InputFormatError,
    InvalidLabelError,
    InvalidParameterError,
    MissingProbabilitiesError,
    NonBinaryTaskError,
)

logger = get_logger(__name__)

UNDEFINED = -1
LABEL_COLUMNS = ["vertex_id", "predicted", "training_label", "probability", "truth"]
ERROR_COLUMNS = ["vertex_id", "estimated_error", "baseline_uncertainty", "predicted", "corrected"]


@dataclass
class LabelData:
    """
    Per-vertex model outputs and training labels

    training_labels is -1 wherever training_mask is False; truth is the
    optional ground truth used only for scoring.
    """

    predicted: np.ndarray
    training_mask: np.ndarray
    training_labels: np.ndarray
    prediction_probs: Optional[np.ndarray] = None
    truth: Optional[np.ndarray] = None
    num_classes: Optional[int] = None

    def __post_init__(self):
        self.predicted = np.asarray(self.predicted, dtype=np.int64)
        self.training_mask = np.asarray(self.training_mask, dtype=bool)
        self.training_labels = np.asarray(self.training_labels, dtype=np.int64)
        if self.prediction_probs is not None:
            self.prediction_probs = np.asarray(self.prediction_probs, dtype=np.float64)
        if self.truth is not None:
            self.truth = np.asarray(self.truth, dtype=np.int64)
        if self.num_classes is None:
            seen = [self.predicted, self.training_labels]
            if self.truth is not None:
                seen.append(self.truth)
            self.num_classes = int(max(int(a.max(initial=UNDEFINED)) for a in seen) + 1)

    @property
    def n(self) -> int:
        return int(self.predicted.shape[0])

    def validate(self, n: Optional[int] = None) -> "LabelData":
        """
        Raises:
            DimensionMismatchError: If arrays disagree with each other or with n
            InvalidLabelError: If class indices are out of range or training
                labels are set outside the training mask
        """
        expected = self.n if n is None else n
        arrays = {
            "predicted": self.predicted,
            "training_mask": self.training_mask,
            "training_labels": self.training_labels,
            "prediction_probs": self.prediction_probs,
            "truth": self.truth,
        }
        for name, arr in arrays.items():
            if arr is not None and arr.shape[0] != expected:
                raise DimensionMismatchError(
                    f"{name} has {arr.shape[0]} entries, expected {expected}",
                    {"field": name, "length": int(arr.shape[0]), "n": expected}
                )

        m = self.num_classes
        if np.any((self.predicted < 0) | (self.predicted >= m)):
            raise InvalidLabelError("Predicted class out of range", {"num_classes": m})
        train = self.training_labels[self.training_mask]
        if np.any((train < 0) | (train >= m)):
            raise InvalidLabelError("Training label out of range", {"num_classes": m})
        if np.any(self.training_labels[~self.training_mask] != UNDEFINED):
            raise InvalidLabelError("Training labels must be undefined outside the training mask")
        if self.truth is not None and np.any((self.truth < 0) | (self.truth >= m)):
            raise InvalidLabelError("True class out of range", {"num_classes": m})
        if self.prediction_probs is not None:
            probs = self.prediction_probs
            if not np.all(np.isfinite(probs)) or np.any((probs < 0) | (probs > 1)):
                raise InvalidLabelError("Prediction probabilities must lie in [0, 1]")
        return self


@dataclass
class ErrorReport:
    """
    Per-vertex estimated errors and their scores

    unsupported marks vertices that received no training mass; their
    estimated error is 1. evaluation_mask marks the vertices AUCs are
    computed over (the non-training ones).
    """

    estimated_error: np.ndarray
    unsupported: np.ndarray
    evaluation_mask: np.ndarray
    baseline_uncertainty: Optional[np.ndarray] = None
    auc_gtda: Optional[float] = None
    auc_baseline: Optional[float] = None
    corrected: Optional[np.ndarray] = None

    def summary(self) -> Dict[str, Any]:
        return {
            "vertices": int(self.estimated_error.shape[0]),
            "evaluated": int(self.evaluation_mask.sum()),
            "unsupported": int(self.unsupported.sum()),
            "mean_estimated_error": float(self.estimated_error.mean()) if self.estimated_error.size else 0.0,
            "auc_gtda": self.auc_gtda,
            "auc_baseline": self.auc_baseline,
            "corrected_flips": None,
        }


def _one_hot_training(labels: LabelData) -> np.ndarray:
    seed = np.zeros((labels.n, labels.num_classes))
    idx = np.flatnonzero(labels.training_mask)
    seed[idx, labels.training_labels[idx]] = 1.0
    return seed


def error_estimation(
    proj: Graph,
    labels: LabelData,
    steps: int = 10,
    alpha: float = 0.5,
    workers: int = 1
) -> ErrorReport:
    """
    Estimate per-vertex prediction error by diffusing training labels over G^(R)

    The one-hot training matrix P0 is diffused as
    P(i) = (1 - alpha) P0 + alpha D^-1 A P(i-1) for `steps` steps, rows are
    normalized to sum 1, and e_i = 1 - P[i, predicted_i]. Rows that stay
    all-zero give e_i = 1 and are marked unsupported.

    When prediction probabilities are present the uncertainty baseline is
    attached; when ground truth is present both AUCs are scored against
    truth != predicted over non-training vertices.

    Raises:
        InvalidParameterError: On steps < 1 or alpha outside (0, 1)
        DimensionMismatchError: If labels and proj disagree on n
        InvalidLabelError: On out-of-range classes
    """
    if steps < 1:
        raise InvalidParameterError("diffuse steps must be at least 1", {"steps": steps})
    if not 0.0 < alpha < 1.0:
        raise InvalidParameterError("alpha must lie in (0, 1)", {"alpha": alpha})
    labels.validate(proj.n)

    diffused = diffuse(transition_matrix(proj), _one_hot_training(labels), alpha, steps, workers)
    mass = diffused.sum(axis=1)
    unsupported = mass <= 0

    normalized = np.zeros_like(diffused)
    np.divide(diffused, mass[:, None], out=normalized, where=~unsupported[:, None])
    on_predicted = normalized[np.arange(labels.n), labels.predicted]
    estimated = np.clip(1.0 - on_predicted, 0.0, 1.0)
    estimated[unsupported] = 1.0

    report = ErrorReport(
        estimated_error=estimated,
        unsupported=unsupported,
        evaluation_mask=~labels.training_mask,
    )
    if labels.prediction_probs is not None:
        report.baseline_uncertainty = uncertainty_baseline(labels)
    if labels.truth is not None:
        score_report(report, labels)

    logger.info(
        "Estimated prediction errors",
        extra={
            "vertices": labels.n,
            "unsupported": int(unsupported.sum()),
            "steps": steps,
            "alpha": alpha,
            "auc_gtda": report.auc_gtda,
            "auc_baseline": report.auc_baseline,
        }
    )
    return report


def score_report(report: ErrorReport, labels: LabelData) -> ErrorReport:
    """Fill in AUCs over the evaluation mask; left None when truth is degenerate"""
    mask = report.evaluation_mask
    wrong = (labels.truth != labels.predicted)[mask]
    try:
        report.auc_gtda = auc(report.estimated_error[mask], wrong)
        if report.baseline_uncertainty is not None:
            report.auc_baseline = auc(report.baseline_uncertainty[mask], wrong)
    except DegenerateTruthError as e:
        logger.warning("AUC not computed", extra=e.to_dict())
    return report


def uncertainty_baseline(labels: LabelData) -> np.ndarray:
    """
    1 - max class probability per vertex

    Raises:
        MissingProbabilitiesError: If labels carry no probabilities
    """
    if labels.prediction_probs is None:
        raise MissingProbabilitiesError("Uncertainty baseline needs prediction probabilities")
    return 1.0 - labels.prediction_probs


def auc(scores: np.ndarray, truth: np.ndarray) -> float:
    """
    ROC AUC: chance a random positive outscores a random negative, ties 0.5

    Raises:
        DegenerateTruthError: If truth has no positives or no negatives
    """
    scores = np.asarray(scores, dtype=np.float64)
    truth = np.asarray(truth, dtype=bool)
    if scores.shape != truth.shape:
        raise DimensionMismatchError(
            "Scores and truth differ in length",
            {"scores": int(scores.size), "truth": int(truth.size)}
        )
    positives = int(truth.sum())
    if positives == 0 or positives == truth.size:
        raise DegenerateTruthError(
            "AUC needs at least one positive and one negative",
            {"positives": positives, "negatives": int(truth.size - positives)}
        )
    return float(roc_auc_score(truth, scores))


def correct_binary_labels(labels: LabelData, report: ErrorReport) -> np.ndarray:
    """
    Flip binary predictions whose estimated error exceeds their probability

    Raises:
        NonBinaryTaskError: If the task does not have exactly 2 classes
        MissingProbabilitiesError: If labels carry no probabilities
    """
    if labels.num_classes != 2:
        raise NonBinaryTaskError(
            "Label correction needs exactly 2 classes",
            {"num_classes": labels.num_classes}
        )
    if labels.prediction_probs is None:
        raise MissingProbabilitiesError("Label correction needs prediction probabilities")

    flip = report.estimated_error > labels.prediction_probs
    corrected = np.where(flip, 1 - labels.predicted, labels.predicted)
    report.corrected = corrected
    logger.info("Corrected binary labels", extra={"flipped": int(flip.sum())})
    return corrected


def _optional_cell(value: str, cast):
    value = value.strip()
    return cast(value) if value else None


def read_labels_csv(path: Union[str, Path], n: Optional[int] = None, num_classes: Optional[int] = None) -> LabelData:
    """
    Read labels CSV with header vertex_id,predicted,training_label[,probability][,truth]

    training_label is empty for non-training vertices. Rows may come in any
    order but must cover vertex ids 0..n-1 exactly once.

    Raises:
        InputFileNotFoundError: If the file does not exist
        InputFormatError: On missing columns, unparseable cells or bad ids
    """
    file_path = Path(path)
    if not file_path.exists():
        raise InputFileNotFoundError(f"Labels file not found: {path}", {"path": str(path)})

    with open(file_path, "r", newline="") as f:
        reader = csv.DictReader(f)
        columns = [c.strip() for c in (reader.fieldnames or [])]
        missing = [c for c in LABEL_COLUMNS[:3] if c not in columns]
        if missing:
            raise InputFormatError(
                f"Labels file {path} is missing columns: {', '.join(missing)}",
                {"path": str(path), "missing": missing}
            )
        reader.fieldnames = columns
        rows = []
        for lineno, row in enumerate(reader, start=2):
            try:
                rows.append((
                    int(row["vertex_id"]),
                    int(row["predicted"]),
                    _optional_cell(row["training_label"] or "", int),
                    _optional_cell(row.get("probability") or "", float),
                    _optional_cell(row.get("truth") or "", int),
                ))
            except ValueError:
                raise InputFormatError(
                    f"Unparseable labels row on line {lineno} of {path}",
                    {"path": str(path), "line": lineno}
                )

    count = n if n is not None else len(rows)
    ids = np.array([r[0] for r in rows], dtype=np.int64)
    if ids.size != count or not np.array_equal(np.sort(ids), np.arange(count)):
        raise InputFormatError(
            f"Labels file {path} must list vertex ids 0..{count - 1} exactly once",
            {"path": str(path), "rows": int(ids.size), "n": count}
        )
    rows.sort(key=lambda r: r[0])

    predicted = np.array([r[1] for r in rows], dtype=np.int64)
    training = np.array([UNDEFINED if r[2] is None else r[2] for r in rows], dtype=np.int64)
    has_probs = "probability" in columns and all(r[3] is not None for r in rows)
    has_truth = "truth" in columns and all(r[4] is not None for r in rows)

    labels = LabelData(
        predicted=predicted,
        training_mask=training != UNDEFINED,
        training_labels=training,
        prediction_probs=np.array([r[3] for r in rows]) if has_probs else None,
        truth=np.array([r[4] for r in rows], dtype=np.int64) if has_truth else None,
        num_classes=num_classes,
    )
    logger.debug(
        "Read labels",
        extra={"path": str(path), "n": labels.n, "training": int(labels.training_mask.sum())}
    )
    return labels.validate()


def write_labels_csv(labels: LabelData, path: Union[str, Path]):
    file_path = Path(path)
    file_path.parent.mkdir(parents=True, exist_ok=True)
    columns = LABEL_COLUMNS[:3]
    if labels.prediction_probs is not None:
        columns = columns + ["probability"]
    if labels.truth is not None:
        columns = columns + ["truth"]

    with open(file_path, "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(columns)
        for i in range(labels.n):
            row = [i, int(labels.predicted[i]), int(labels.training_labels[i]) if labels.training_mask[i] else ""]
            if labels.prediction_probs is not None:
                row.append(f"{labels.prediction_probs[i]:.17g}")
            if labels.truth is not None:
                row.append(int(labels.truth[i]))
            writer.writerow(row)


def write_errors_csv(report: ErrorReport, labels: LabelData, path: Union[str, Path]):
    """Write vertex_id,estimated_error,baseline_uncertainty,predicted[,corrected]"""
    file_path = Path(path)
    file_path.parent.mkdir(parents=True, exist_ok=True)
    columns = ERROR_COLUMNS if report.corrected is not None else ERROR_COLUMNS[:-1]

    with open(file_path, "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(columns)
        for i in range(labels.n):
            baseline = "" if report.baseline_uncertainty is None else f"{report.baseline_uncertainty[i]:.17g}"
            row = [i, f"{report.estimated_error[i]:.17g}", baseline, int(labels.predicted[i])]
            if report.corrected is not None:
                row.append(int(report.corrected[i]))
            writer.writerow(row)


def read_errors_csv(path: Union[str, Path]) -> Dict[str, np.ndarray]:
    """
    Read an errors CSV back into column arrays

    Empty baseline cells read back as NaN; corrected is present only if
    the file has that column.
    """
    file_path = Path(path)
    if not file_path.exists():
        raise InputFileNotFoundError(f"Errors file not found: {path}", {"path": str(path)})

    with open(file_path, "r", newline="") as f:
        reader = csv.DictReader(f)
        columns = reader.fieldnames or []
        if columns[:4] != ERROR_COLUMNS[:4]:
            raise InputFormatError(f"Unexpected errors CSV header in {path}", {"path": str(path), "header": columns})
        rows = list(reader)

    result = {
        "vertex_id": np.array([int(r["vertex_id"]) for r in rows], dtype=np.int64),
        "estimated_error": np.array([float(r["estimated_error"]) for r in rows]),
        "baseline_uncertainty": np.array([float(r["baseline_uncertainty"]) if r["baseline_uncertainty"] else np.nan for r in rows]),
        "predicted": np.array([int(r["predicted"]) for r in rows], dtype=np.int64),
    }
    if "corrected" in columns:
        result["corrected"] = np.array([int(r["corrected"]) for r in rows], dtype=np.int64)
    return result


def write_summary(
    report: ErrorReport,
    labels: LabelData,
    path: Union[str, Path],
    extra: Optional[Dict[str, Any]] = None
):
    """summary.json: AUCs and counts, plus any pipeline counts in extra"""
    summary = report.summary()
    if report.corrected is not None:
        summary["corrected_flips"] = int(np.sum(report.corrected != labels.predicted))
    if extra:
        summary.update(extra)
    save_json(summary, path)
