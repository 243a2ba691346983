"""
Error Estimator Agent

This agent projects a Reeb net back onto the datapoints and estimates
where the model's predictions lack support from training data.
"""

from dataclasses import dataclass
from typing import Any, Dict, Optional

from reebnet.diagnose import ErrorReport, LabelData, correct_binary_labels, error_estimation
from reebnet.graph import Graph
from reebnet.reeb import ProjectedGraph, ReebNet, project
from utils.logger import get_logger
from utils.exceptions import ErrorEstimatorException, ValidationException

logger = get_logger(__name__)


@dataclass
class Diagnosis:
    projected: ProjectedGraph
    report: ErrorReport


class ErrorEstimatorAgent:
    """
    Agent responsible for error estimation

    Features:
    - Reeb net projection to the datapoint graph
    - Training-label diffusion and per-point error estimates
    - Uncertainty baseline and AUC scoring when truth is known
    - Optional binary label correction
    """

    def __init__(self, diagnose_config: Optional[Dict[str, Any]] = None, workers: int = 1):
        """
        Initialize Error Estimator Agent

        Args:
            diagnose_config: The `diagnose` section (steps, alpha, correct)
            workers: Threads for the per-class diffusion
        """
        self.config = {"steps": 10, "alpha": 0.5, "correct": False, **(diagnose_config or {})}
        self.workers = workers
        logger.info("Error Estimator Agent initialized", extra={"diagnose": self.config})

    def estimate(self, reeb: ReebNet, g: Graph, labels: LabelData) -> Diagnosis:
        """
        Project the net and estimate errors on the projection

        Raises:
            ErrorEstimatorException: If estimation fails for reasons other
                than invalid inputs
        """
        try:
            projected = project(reeb, g)
            report = error_estimation(
                projected,
                labels,
                steps=int(self.config["steps"]),
                alpha=float(self.config["alpha"]),
                workers=self.workers,
            )
            if self.config.get("correct"):
                correct_binary_labels(labels, report)
        except ValidationException:
            raise
        except Exception as e:
            logger.error("Error estimation failed", extra={"error": str(e)}, exc_info=True)
            raise ErrorEstimatorException("Error estimation failed", {"error": str(e)})

        logger.info("Diagnosis finished", extra=report.summary())
        return Diagnosis(projected=projected, report=report)
