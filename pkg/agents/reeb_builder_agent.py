"""
Reeb Builder Agent

This agent runs the GTDA construction on a graph and its lenses:
smoothing, normalization, recursive splitting, node merging, Reeb net
assembly and component merging. It also builds the classic mapper net
used as a baseline.
"""

from dataclasses import dataclass
from typing import Any, Dict

from reebnet.graph import Graph
from reebnet.lens import LensMatrix, SmoothingParams, make_merge_distance, minmax_normalize, smooth
from reebnet.mapper import MapperParams, count_small_components, mapper_cover, mapper_reeb
from reebnet.merging import MergeTrace, component_merging, node_merging
from reebnet.reeb import ReebNet, build_reeb_net
from reebnet.splitter import FinalSets, GtdaParams, gtda_split
from utils.logger import get_logger
from utils.exceptions import LensException, ReebBuilderException, ValidationException

logger = get_logger(__name__)


@dataclass
class ReebBuildResult:
    """Everything one GTDA run produces, stage by stage"""

    params: GtdaParams
    lens: LensMatrix
    split_sets: FinalSets
    merged_sets: FinalSets
    node_trace: MergeTrace
    initial_reeb: ReebNet
    reeb: ReebNet
    component_trace: MergeTrace

    def counts(self) -> Dict[str, Any]:
        labeling = self.reeb.components() if self.reeb.num_nodes else None
        return {
            "finalized_sets": len(self.split_sets),
            "split_generations": self.split_sets.num_generations,
            "forced_finalizations": len(self.split_sets.forced),
            "node_merge_rounds": self.node_trace.num_rounds,
            "node_merges": len(self.node_trace.decisions),
            "unmergeable_sets": len(self.merged_sets.unmergeable),
            "reeb_nodes": self.reeb.num_nodes,
            "overlap_edges": int(self.reeb.overlap_edges.shape[0]),
            "extra_edges": int(self.reeb.extra_edges.shape[0]),
            "component_merge_rounds": self.component_trace.num_rounds,
            "excluded_components": len(self.component_trace.flagged),
            "excluded_vertices": int(self.reeb.excluded.size),
            "reeb_components": labeling.count if labeling is not None else 0,
        }


class ReebBuilderAgent:
    """
    Agent responsible for building Reeb nets

    Features:
    - Lens smoothing and min-max normalization
    - Recursive lens splitting with overlap
    - Node and component merging with audit traces
    - Classic mapper baseline on the same lenses
    """

    def __init__(self, workers: int = 1):
        """
        Initialize Reeb Builder Agent

        Args:
            workers: Threads used inside splitting, merging and smoothing
        """
        self.workers = workers
        logger.info("Reeb Builder Agent initialized", extra={"workers": workers})

    def prepare_lens(self, g: Graph, lens: LensMatrix, smoothing: SmoothingParams) -> LensMatrix:
        """Smooth over g, then rescale every lens to [0, 1]"""
        return minmax_normalize(smooth(lens, g, smoothing, self.workers))

    def build(self, g: Graph, lens: LensMatrix, params: GtdaParams) -> ReebBuildResult:
        """
        Run the full GTDA construction

        Args:
            g: Graph
            lens: Raw lenses (smoothed and normalized here)
            params: GTDA parameters

        Returns:
            ReebBuildResult

        Raises:
            ReebBuilderException: If any construction step fails
        """
        try:
            prepared = self.prepare_lens(g, lens, params.smoothing)
            dist = make_merge_distance(params.merge_distance, prepared)

            split_sets = gtda_split(g, prepared, params, self.workers)
            merged_sets, node_trace = node_merging(split_sets, g, params.min_node, dist, self.workers)
            initial = build_reeb_net(merged_sets)
            reeb, _, component_trace = component_merging(
                merged_sets, g, initial, params.min_component, dist, self.workers
            )
        except (ValidationException, LensException):
            raise
        except Exception as e:
            logger.error("Reeb net construction failed", extra={"error": str(e)}, exc_info=True)
            raise ReebBuilderException("Reeb net construction failed", {"error": str(e)})

        result = ReebBuildResult(
            params=params,
            lens=prepared,
            split_sets=split_sets,
            merged_sets=merged_sets,
            node_trace=node_trace,
            initial_reeb=initial,
            reeb=reeb,
            component_trace=component_trace,
        )
        logger.info("Reeb net built", extra=result.counts())
        return result

    def build_mapper(
        self,
        g: Graph,
        lens: LensMatrix,
        smoothing: SmoothingParams,
        mapper_params: MapperParams
    ) -> ReebNet:
        """Classic mapper net over the same smoothed, normalized lenses"""
        prepared = self.prepare_lens(g, lens, smoothing)
        reeb = mapper_reeb(g, mapper_cover(prepared, mapper_params), self.workers)
        logger.info(
            "Mapper baseline built",
            extra={
                "bins_per_lens": mapper_params.bins_per_lens,
                "nodes": reeb.num_nodes,
                "singleton_components": count_small_components(reeb, 1),
            }
        )
        return reeb

