"""
Orchestrator

Central coordinator that runs the pipeline stages through their agents:
ingest, Reeb net construction, error estimation and report emission.
Also hosts the command-line entry point.
"""

import sys
import argparse
from typing import Any, Callable, Dict, List, Optional

from dotenv import load_dotenv

from agents.graph_loader_agent import GraphLoaderAgent
from agents.reeb_builder_agent import ReebBuilderAgent
from agents.error_estimator_agent import ErrorEstimatorAgent
from agents.report_writer_agent import ReportWriterAgent
from orchestrator.run_config import RunConfig, load_config, resolve_max_size
from reebnet.datasets import surrogate_predictor, swiss_roll, write_instance
from reebnet.graph import write_edge_list
from reebnet.lens import SmoothingParams
from reebnet.mapper import MapperParams
from reebnet.preprocess import read_embeddings
from utils.logger import get_logger
from utils.helpers import ensure_directory
from utils.exceptions import (
    ConfigurationException,
    InputFileNotFoundError,
    InvalidParameterError,
    ReebNetException,
    StageExecutionError,
)

logger = get_logger(__name__)

# causes reported as usage errors rather than stage failures
USAGE_ERRORS = (InputFileNotFoundError, ConfigurationException, InvalidParameterError)


class Orchestrator:
    """
    Central orchestrator for Reeb net diagnostics

    Features:
    - Stage coordination with per-stage logging
    - GTDA build and diagnose pipelines
    - Classic mapper baseline
    - Synthetic Swiss roll instances and kNN graphs from embeddings
    """

    def __init__(self, config_path: Optional[str] = None):
        """Load configuration; agents are created per run from its RunConfig"""
        logger.info("Initializing Orchestrator", extra={"config_path": config_path})
        self.config = load_config(config_path)

    def run_config(self, args: Optional[argparse.Namespace] = None) -> RunConfig:
        return RunConfig.from_sources(self.config, args)

    def run_pipeline(self, cfg: RunConfig, diagnose: bool = False) -> Dict[str, Any]:
        """
        Run ingest, GTDA, optional diagnosis and reporting

        Args:
            cfg: Run configuration
            diagnose: Estimate errors and write summary.json (needs labels)

        Returns:
            Result with per-stage status and written files

        Raises:
            InputFileNotFoundError: If a required input is missing
            InvalidParameterError: If K cannot be resolved
            StageExecutionError: If a stage fails
        """
        cfg.require_files("lens")
        if diagnose:
            cfg.require_files("labels")
        for name in ("graph", "embeddings", "labels"):
            if getattr(cfg, f"{name}_path") is not None:
                cfg.require_files(name)

        loader = GraphLoaderAgent(cfg.knn, cfg.seed, cfg.workers)
        builder = ReebBuilderAgent(cfg.workers)
        writer = ReportWriterAgent(cfg.layout, cfg.seed)
        result: Dict[str, Any] = {"command": "diagnose" if diagnose else "build", "stages": {}}

        logger.info("Stage 1: Loading inputs")
        g = self._execute_stage("ingest", loader.load_graph, cfg.graph_path, cfg.embeddings_path)
        lens = self._execute_stage("ingest", loader.load_lens, cfg.lens_path, g.n)
        labels = None
        if cfg.labels_path is not None:
            labels = self._execute_stage("ingest", loader.load_labels, cfg.labels_path, g.n, lens.m)
        result["stages"]["ingest"] = {"status": "success", "n": g.n, "edges": g.num_edges, "lenses": lens.m}

        params = cfg.gtda_params(resolve_max_size(cfg.gtda.get("max_size"), labels))

        logger.info("Stage 2: Building Reeb net")
        build = self._execute_stage("gtda", builder.build, g, lens, params)
        counts = build.counts()
        result["stages"]["gtda"] = {"status": "success", **counts}

        report = None
        projected = None
        if diagnose:
            logger.info("Stage 3: Estimating errors")
            estimator = ErrorEstimatorAgent(cfg.diagnose, cfg.workers)
            diagnosis = self._execute_stage("diagnose", estimator.estimate, build.reeb, g, labels)
            report, projected = diagnosis.report, diagnosis.projected
            result["stages"]["diagnose"] = {"status": "success", **report.summary()}

        logger.info("Stage 4: Writing report")
        metadata = {"command": result["command"], "params": params.to_dict(), "seed": cfg.seed, "counts": counts}
        files = self._execute_stage(
            "report",
            writer.write,
            build.reeb,
            g,
            cfg.output_dir,
            cfg.formats,
            labels=labels,
            errors=report,
            projected=projected,
            metadata=metadata,
        )
        if report is not None:
            files["summary"] = self._execute_stage(
                "report", writer.write_summary, report, labels, cfg.output_dir, counts
            )
        result["stages"]["report"] = {"status": "success", "files": sorted(p.name for p in files.values())}
        result["files"] = files
        result["status"] = "completed_success"

        logger.info("Pipeline completed", extra={"command": result["command"], "output_dir": str(cfg.output_dir)})
        return result

    def run_mapper(self, cfg: RunConfig) -> Dict[str, Any]:
        """Classic mapper baseline over the same inputs and smoothing"""
        cfg.require_files("lens")
        loader = GraphLoaderAgent(cfg.knn, cfg.seed, cfg.workers)
        builder = ReebBuilderAgent(cfg.workers)
        writer = ReportWriterAgent(cfg.layout, cfg.seed)

        g = self._execute_stage("ingest", loader.load_graph, cfg.graph_path, cfg.embeddings_path)
        lens = self._execute_stage("ingest", loader.load_lens, cfg.lens_path, g.n)
        labels = None
        if cfg.labels_path is not None:
            labels = self._execute_stage("ingest", loader.load_labels, cfg.labels_path, g.n, lens.m)

        smoothing = SmoothingParams(float(cfg.gtda["alpha"]), int(cfg.gtda["smooth_steps"])).validate()
        mapper_params = MapperParams.from_config(cfg.mapper)
        reeb = self._execute_stage("mapper", builder.build_mapper, g, lens, smoothing, mapper_params)

        metadata = {
            "command": "mapper",
            "params": {"alpha": smoothing.alpha, "smooth_steps": smoothing.steps,
                       "bins_per_lens": mapper_params.bins_per_lens,
                       "overlap_fraction": mapper_params.overlap_fraction},
            "seed": cfg.seed,
        }
        files = self._execute_stage(
            "report", writer.write, reeb, g, cfg.output_dir, cfg.formats, labels=labels, metadata=metadata
        )
        return {"command": "mapper", "status": "completed_success", "nodes": reeb.num_nodes, "files": files}

    def run_synth(self, cfg: RunConfig) -> Dict[str, Any]:
        """Sample a Swiss roll, simulate predictions and write the input triple"""
        roll = cfg.swiss_roll
        inst = self._execute_stage(
            "synth",
            swiss_roll,
            n=int(roll["n"]),
            noise=float(roll["noise"]),
            seed=cfg.seed,
            feature_k=int(roll.get("feature_knn", 2)),
        )
        lens, labels = self._execute_stage(
            "synth", surrogate_predictor, inst, label_noise=float(roll["label_noise"]), seed=cfg.seed
        )
        self._execute_stage("synth", write_instance, inst, lens, labels, cfg.output_dir)
        return {"command": "synth", "status": "completed_success", "n": inst.n, "output_dir": cfg.output_dir}

    def run_knn(self, cfg: RunConfig) -> Dict[str, Any]:
        """Embeddings to a symmetrized kNN edge list"""
        cfg.require_files("embeddings")
        loader = GraphLoaderAgent(cfg.knn, cfg.seed, cfg.workers)
        e = self._execute_stage("knn", read_embeddings, cfg.embeddings_path)
        g = self._execute_stage("knn", loader.embeddings_to_graph, e)
        path = ensure_directory(cfg.output_dir) / "edges.txt"
        self._execute_stage("knn", write_edge_list, g, path)
        return {"command": "knn", "status": "completed_success", "n": g.n, "edges": g.num_edges, "files": {"edges": path}}

    def _execute_stage(self, stage_name: str, func: Callable, *args, **kwargs):
        """Execute a pipeline stage with error handling"""

        try:
            logger.info(f"Executing stage: {stage_name}")
            result = func(*args, **kwargs)
            logger.info(f"Stage completed: {stage_name}")
            return result

        except Exception as e:
            details = e.to_dict() if isinstance(e, ReebNetException) else {"error": str(e)}
            logger.error(f"Stage failed: {stage_name}", extra={"stage": stage_name, **details}, exc_info=True)
            raise StageExecutionError(
                f"Stage execution failed: {stage_name}: {e}",
                {"stage": stage_name, "error": str(e)}
            ) from e


def exit_code(error: BaseException) -> int:
    """2 for usage errors (missing files, bad configuration or parameters), else 1"""
    cause = error.__cause__ if isinstance(error, StageExecutionError) and error.__cause__ else error
    return 2 if isinstance(cause, USAGE_ERRORS) else 1


def _add_input_flags(parser: argparse.ArgumentParser, lens: bool = True):
    parser.add_argument("--graph", type=str, help="Edge list (u v [w] per line)")
    parser.add_argument("--embeddings", type=str, help="Embeddings (.csv, or .bin/.f64 binary) turned into a kNN graph")
    if lens:
        parser.add_argument("--lens", type=str, help="Lens CSV, one column per lens")
    parser.add_argument("--labels", type=str, help="Labels CSV (vertex_id,predicted,training_label[,probability][,truth])")


def _add_knn_flags(parser: argparse.ArgumentParser):
    parser.add_argument("--knn-k", type=int, help="Neighbors per point (default: 5)")
    parser.add_argument("--metric", choices=["cosine", "euclidean"], help="kNN metric (default: cosine)")
    parser.add_argument("--pca-dim", type=int, help="PCA-whiten embeddings to this dimension first")


def _add_smoothing_flags(parser: argparse.ArgumentParser):
    parser.add_argument("--alpha", type=float, help="Lens smoothing weight in (0, 1) (default: 0.5)")
    parser.add_argument("-S", "--smooth-steps", type=int, help="Lens smoothing steps (default: 5)")


def _add_gtda_flags(parser: argparse.ArgumentParser):
    parser.add_argument("-K", "--max-size", type=int, help="Largest node size before splitting stops")
    parser.add_argument("-d", "--min-diff", type=float, help="Smallest lens spread worth splitting (default: 0)")
    parser.add_argument("-r", "--overlap", type=float, help="Split overlap ratio (default: 0.01)")
    parser.add_argument("-s1", "--min-node", type=int, help="Nodes of at most this size get merged (default: 5)")
    parser.add_argument("-s2", "--min-component", type=int, help="Components of at most this many nodes get merged (default: 5)")
    _add_smoothing_flags(parser)


def _add_output_flags(parser: argparse.ArgumentParser, report: bool = True):
    parser.add_argument("--out", type=str, help="Output directory (default: results)")
    parser.add_argument("--config", type=str, help="YAML configuration (default: config/gtda.yaml)")
    parser.add_argument("--seed", type=int, help="Random seed (default: 0)")
    parser.add_argument("--workers", type=int, help="Worker threads; output is identical for any count")
    if report:
        parser.add_argument("--format", type=str, help="Comma list of json,dot,graphml,html,csv (default: all)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="reebnet",
        description="Reeb networks over prediction lenses: topology-guided error diagnostics"
    )
    commands = parser.add_subparsers(dest="command", required=True)

    build = commands.add_parser("build", help="Graph and lenses to Reeb net artifacts")
    _add_input_flags(build)
    _add_knn_flags(build)
    _add_gtda_flags(build)
    _add_output_flags(build)

    diagnose = commands.add_parser("diagnose", help="Build, then estimate prediction errors")
    _add_input_flags(diagnose)
    _add_knn_flags(diagnose)
    _add_gtda_flags(diagnose)
    diagnose.add_argument("--diffuse-steps", type=int, help="Error estimation diffusion steps (default: 10)")
    diagnose.add_argument("--correct", action="store_true", help="Flip binary labels with high estimated error")
    _add_output_flags(diagnose)

    mapper = commands.add_parser("mapper", help="Classic mapper baseline")
    _add_input_flags(mapper)
    _add_knn_flags(mapper)
    _add_smoothing_flags(mapper)
    mapper.add_argument("--bins", type=int, help="Bins per lens (default: 10)")
    mapper.add_argument("--mapper-overlap", type=float, help="Bin overlap fraction (default: 0.1)")
    _add_output_flags(mapper)

    synth = commands.add_parser("synth", help="Synthetic datasets")
    datasets = synth.add_subparsers(dest="dataset", required=True)
    roll = datasets.add_parser("swiss-roll", help="Noisy Swiss roll with simulated predictions")
    roll.add_argument("--n", type=int, help="Number of points (default: 1000)")
    roll.add_argument("--noise", type=float, help="Gaussian noise level (default: 1.2)")
    roll.add_argument("--label-noise", type=float, help="Fraction of corrupted seed labels (default: 0.15)")
    _add_output_flags(roll, report=False)

    knn = commands.add_parser("knn", help="Embeddings to a kNN edge list")
    knn.add_argument("--embeddings", type=str, help="Embeddings (.csv, or .bin/.f64 binary)")
    _add_knn_flags(knn)
    _add_output_flags(knn, report=False)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point; returns the process exit status"""
    load_dotenv()
    args = build_parser().parse_args(argv)

    try:
        orchestrator = Orchestrator(args.config)
        cfg = orchestrator.run_config(args)

        if args.command in ("build", "diagnose"):
            result = orchestrator.run_pipeline(cfg, diagnose=args.command == "diagnose")
        elif args.command == "mapper":
            result = orchestrator.run_mapper(cfg)
        elif args.command == "synth":
            result = orchestrator.run_synth(cfg)
        else:
            result = orchestrator.run_knn(cfg)

    except ReebNetException as e:
        print(f"Error: {e.message}", file=sys.stderr)
        return exit_code(e)

    print(f"{result['command']}: {result['status']}")
    for name, path in sorted(result.get("files", {}).items()):
        print(f"  {name}: {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
