"""
__init__.py for agents package
"""

from agents.graph_loader_agent import GraphLoaderAgent
from agents.reeb_builder_agent import ReebBuilderAgent, ReebBuildResult
from agents.error_estimator_agent import ErrorEstimatorAgent, Diagnosis
from agents.report_writer_agent import ReportWriterAgent

__all__ = [
    'GraphLoaderAgent',
    'ReebBuilderAgent',
    'ReebBuildResult',
    'ErrorEstimatorAgent',
    'Diagnosis',
    'ReportWriterAgent',
]
