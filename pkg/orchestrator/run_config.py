"""
Run Configuration

Loads config/gtda.yaml, validates it, fills built-in defaults and merges
command-line overrides into a RunConfig. Precedence is flag, then YAML
value, then default.
"""

from argparse import Namespace
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import numpy as np

from reebnet.diagnose import LabelData
from reebnet.report import parse_formats
from reebnet.splitter import GtdaParams
from utils.helpers import load_yaml_config, merge_dicts, validate_config_schema
from utils.logger import get_logger
from utils.exceptions import InputFileNotFoundError, InvalidParameterError

logger = get_logger(__name__)

DEFAULT_CONFIG_PATH = "config/gtda.yaml"

# fraction of the smallest predicted class used for K when none is given
DEFAULT_K_FRACTION = 0.05

DEFAULTS: Dict[str, Any] = {
    "gtda": {
        "max_size": None,
        "min_diff": 0.0,
        "overlap": 0.01,
        "min_node": 5,
        "min_component": 5,
        "alpha": 0.5,
        "smooth_steps": 5,
        "merge_distance": "linf",
    },
    "diagnose": {"steps": 10, "alpha": 0.5, "correct": False},
    "knn": {"k": 5, "metric": "cosine", "pca_dim": None},
    "mapper": {"bins_per_lens": 10, "overlap_fraction": 0.1},
    "swiss_roll": {"n": 1000, "noise": 1.2, "label_noise": 0.15, "feature_knn": 2},
    "layout": {"max_sweeps": 1000, "tolerance": 1e-4, "work_budget": 5e7, "max_exact_nodes": 2000},
    "report": {"formats": ["json", "dot", "graphml", "html", "csv"], "output_dir": "results"},
    "runtime": {"workers": 1, "seed": 0},
}

_INT = {"type": "integer"}
_POS_INT = {"type": "integer", "minimum": 1}
_NUM = {"type": "number"}
_UNIT = {"type": "number", "minimum": 0, "exclusiveMaximum": 1}


def _section(properties: Dict[str, Any]) -> Dict[str, Any]:
    return {"type": "object", "properties": properties, "additionalProperties": False}


CONFIG_SCHEMA: Dict[str, Any] = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "gtda": _section({
            "max_size": {"type": ["integer", "null"], "minimum": 1},
            "min_diff": {"type": "number", "minimum": 0},
            "overlap": _UNIT,
            "min_node": _POS_INT,
            "min_component": _POS_INT,
            "alpha": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
            "smooth_steps": {"type": "integer", "minimum": 0},
            "merge_distance": {"type": "string"},
        }),
        "diagnose": _section({
            "steps": _POS_INT,
            "alpha": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
            "correct": {"type": "boolean"},
        }),
        "knn": _section({
            "k": _POS_INT,
            "metric": {"enum": ["cosine", "euclidean"]},
            "pca_dim": {"type": ["integer", "null"], "minimum": 1},
        }),
        "mapper": _section({"bins_per_lens": _POS_INT, "overlap_fraction": _UNIT}),
        "swiss_roll": _section({
            "n": {"type": "integer", "minimum": 30},
            "noise": {"type": "number", "minimum": 0},
            "label_noise": _UNIT,
            "feature_knn": _POS_INT,
        }),
        "layout": _section({
            "max_sweeps": _POS_INT,
            "tolerance": {"type": "number", "exclusiveMinimum": 0},
            "work_budget": {"type": "number", "exclusiveMinimum": 0},
            "max_exact_nodes": _POS_INT,
        }),
        "report": _section({
            "formats": {"type": "array", "items": {"enum": ["json", "dot", "graphml", "html", "csv"]}},
            "output_dir": {"type": "string"},
        }),
        "runtime": _section({"workers": _POS_INT, "seed": _INT}),
    },
}


def load_config(path: Optional[Union[str, Path]] = None) -> Dict[str, Any]:
    """
    Load and validate the YAML configuration over the built-in defaults

    A missing default config file is not an error; an explicitly named
    missing file is.

    Raises:
        ConfigurationFileNotFoundError: If an explicit path does not exist
        ConfigurationValidationError: If the file fails the schema
    """
    if path is None:
        if not Path(DEFAULT_CONFIG_PATH).exists():
            logger.debug("No configuration file, using defaults")
            return merge_dicts({}, DEFAULTS)
        path = DEFAULT_CONFIG_PATH

    loaded = load_yaml_config(path)
    validate_config_schema(loaded, CONFIG_SCHEMA)
    return merge_dicts(DEFAULTS, loaded)


def resolve_max_size(configured: Optional[int], labels: Optional[LabelData]) -> int:
    """
    K from configuration, else max(1, round(5% of the smallest predicted class))

    Raises:
        InvalidParameterError: If K is not configured and there are no labels
    """
    if configured is not None:
        return int(configured)
    if labels is None:
        raise InvalidParameterError(
            "max_size (K) is required when no labels are supplied",
            {"parameter": "max_size"}
        )
    counts = np.bincount(labels.predicted, minlength=labels.num_classes)
    counts = counts[counts > 0]
    k = max(1, int(round(DEFAULT_K_FRACTION * int(counts.min()))))
    logger.info("Resolved max_size from predicted class sizes", extra={"max_size": k, "smallest_class": int(counts.min())})
    return k


@dataclass
class RunConfig:
    """Inputs, parameters and output location of one command"""

    graph_path: Optional[Path] = None
    embeddings_path: Optional[Path] = None
    lens_path: Optional[Path] = None
    labels_path: Optional[Path] = None
    output_dir: Path = Path("results")
    gtda: Dict[str, Any] = field(default_factory=lambda: dict(DEFAULTS["gtda"]))
    diagnose: Dict[str, Any] = field(default_factory=lambda: dict(DEFAULTS["diagnose"]))
    knn: Dict[str, Any] = field(default_factory=lambda: dict(DEFAULTS["knn"]))
    mapper: Dict[str, Any] = field(default_factory=lambda: dict(DEFAULTS["mapper"]))
    swiss_roll: Dict[str, Any] = field(default_factory=lambda: dict(DEFAULTS["swiss_roll"]))
    layout: Dict[str, Any] = field(default_factory=lambda: dict(DEFAULTS["layout"]))
    formats: List[str] = field(default_factory=lambda: list(DEFAULTS["report"]["formats"]))
    workers: int = 1
    seed: int = 0

    @classmethod
    def from_sources(cls, config: Dict[str, Any], args: Optional[Namespace] = None) -> "RunConfig":
        """Merge a loaded config with parsed command-line arguments"""
        a = vars(args) if args is not None else {}

        def flag(name):
            return a.get(name)

        def first_set(*values):
            return next(v for v in values if v is not None)

        def path(name):
            value = flag(name)
            return Path(value) if value else None

        def override(section: str, mapping: Dict[str, str]) -> Dict[str, Any]:
            values = dict(config.get(section, {}))
            for key, arg in mapping.items():
                if flag(arg) is not None:
                    values[key] = flag(arg)
            return values

        gtda = override("gtda", {
            "max_size": "max_size",
            "min_diff": "min_diff",
            "overlap": "overlap",
            "min_node": "min_node",
            "min_component": "min_component",
            "alpha": "alpha",
            "smooth_steps": "smooth_steps",
        })
        diagnose = override("diagnose", {"steps": "diffuse_steps"})
        if flag("correct"):
            diagnose["correct"] = True
        runtime = config.get("runtime", {})
        report = config.get("report", {})

        cfg = cls(
            graph_path=path("graph"),
            embeddings_path=path("embeddings"),
            lens_path=path("lens"),
            labels_path=path("labels"),
            output_dir=Path(flag("out") or report.get("output_dir") or "results"),
            gtda=gtda,
            diagnose=diagnose,
            knn=override("knn", {"k": "knn_k", "metric": "metric", "pca_dim": "pca_dim"}),
            mapper=override("mapper", {"bins_per_lens": "bins", "overlap_fraction": "mapper_overlap"}),
            swiss_roll=override("swiss_roll", {"n": "n", "noise": "noise", "label_noise": "label_noise"}),
            layout=dict(config.get("layout", {})),
            formats=parse_formats(flag("format") or report.get("formats")),
            workers=int(first_set(flag("workers"), runtime.get("workers"), 1)),
            seed=int(first_set(flag("seed"), runtime.get("seed"), 0)),
        )
        return cfg.validate()

    def validate(self) -> "RunConfig":
        """
        Raises:
            InvalidParameterError: On a bad worker count or invalid GTDA values
        """
        if self.workers < 1:
            raise InvalidParameterError("workers must be at least 1", {"workers": self.workers})
        if self.gtda.get("max_size") is not None:
            self.gtda_params(int(self.gtda["max_size"]))
        return self

    def gtda_params(self, max_size: int) -> GtdaParams:
        return GtdaParams.from_config(self.gtda, max_size=max_size)

    def require_files(self, *names: str):
        """
        Check that the named inputs are set and exist

        Raises:
            InputFileNotFoundError: Naming the missing path or option
        """
        for name in names:
            value = getattr(self, f"{name}_path")
            if value is None:
                raise InputFileNotFoundError(f"No {name} file given (--{name})", {"input": name})
            if not value.exists():
                raise InputFileNotFoundError(f"{name.capitalize()} file not found: {value}", {"path": str(value)})
