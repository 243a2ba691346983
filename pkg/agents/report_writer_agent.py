"""
Report Writer Agent

This agent turns a finished Reeb net into report files: node summaries,
layout, closest-member annotations and the selected output formats.
"""

from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np

from reebnet.diagnose import ErrorReport, LabelData, write_summary
from reebnet.graph import Graph
from reebnet.layout import Layout, LayoutParams, layout_reeb
from reebnet.reeb import ReebNet, closest_members, project, summarize
from reebnet.report import emit_report
from utils.logger import get_logger
from utils.exceptions import DataIOException, ReebNetException, ReportWriterException

logger = get_logger(__name__)


class ReportWriterAgent:
    """
    Agent responsible for writing reports

    Features:
    - Pie-chart node summaries from predicted or training labels
    - Stress-majorization layout per Reeb component
    - JSON, DOT, GraphML, HTML and CSV outputs
    - summary.json with AUCs and pipeline counts
    """

    def __init__(self, layout_config: Optional[Dict[str, Any]] = None, seed: int = 0):
        """
        Initialize Report Writer Agent

        Args:
            layout_config: The `layout` configuration section
            seed: Layout seed
        """
        self.layout_params = LayoutParams.from_config(layout_config or {})
        self.seed = seed
        logger.info("Report Writer Agent initialized", extra={"seed": seed})

    def write(
        self,
        reeb: ReebNet,
        g: Graph,
        directory: Path,
        formats: List[str],
        labels: Optional[LabelData] = None,
        errors: Optional[ErrorReport] = None,
        projected: Optional[Graph] = None,
        summary_mode: str = "predicted",
        metadata: Optional[Dict[str, Any]] = None
    ) -> Dict[str, Path]:
        """
        Write report files for a Reeb net

        Args:
            reeb: Final Reeb net
            g: Graph the net was built on (projected if no projection given)
            directory: Output directory
            formats: Formats to write
            labels: Labels for node summaries and errors.csv
            errors: Error report for the overlay and errors.csv
            projected: Precomputed projected graph
            summary_mode: "predicted" or "training" pie charts
            metadata: Extra fields for reebnet.json

        Returns:
            Mapping of format to written path

        Raises:
            ReportWriterException: If summarizing, layout or writing fails
        """
        try:
            summaries = []
            if labels is not None:
                source = labels.predicted if summary_mode == "predicted" else labels.training_labels
                summaries = summarize(reeb, source, summary_mode, labels.num_classes)

            if reeb.num_nodes == 0:
                # every component was excluded; the files still record the exclusions
                logger.warning(
                    "Reeb net has no nodes, writing exclusions only",
                    extra={"excluded_vertices": int(reeb.excluded.size)}
                )
                layout, closest = Layout(positions=np.zeros((0, 2))), {}
            else:
                layout = layout_reeb(reeb, self.seed, self.layout_params)
                closest = closest_members(reeb, projected if projected is not None else project(reeb, g))

            return emit_report(
                reeb,
                layout,
                summaries,
                errors,
                directory,
                labels=labels,
                closest=closest,
                metadata=metadata,
                formats=formats,
            )
        except DataIOException:
            raise
        except ReebNetException as e:
            logger.error("Report generation failed", extra=e.to_dict(), exc_info=True)
            raise ReportWriterException("Report generation failed", {"error": e.message, **e.details})

    def write_summary(
        self,
        errors: ErrorReport,
        labels: LabelData,
        directory: Path,
        counts: Optional[Dict[str, Any]] = None
    ) -> Path:
        path = Path(directory) / "summary.json"
        write_summary(errors, labels, path, counts)
        logger.info("Wrote summary", extra={"path": str(path)})
        return path
