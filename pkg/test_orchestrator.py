"""Command-line pipelines run through the orchestrator"""

import json

import pytest

from orchestrator.orchestrator import Orchestrator, exit_code, main
from reebnet.graph import read_edge_list
from reebnet.report import read_reebnet_json
from utils.exceptions import (
    ConfigurationValidationError,
    InputFileNotFoundError,
    InvalidGraphError,
    StageExecutionError,
)


@pytest.fixture(scope="module")
def roll_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("roll")
    assert main(["synth", "swiss-roll", "--n", "150", "--seed", "1", "--out", str(out)]) == 0
    return out


def inputs(roll_dir, labels=True):
    args = ["--graph", str(roll_dir / "edges.txt"), "--lens", str(roll_dir / "lens.csv")]
    if labels:
        args += ["--labels", str(roll_dir / "labels.csv")]
    return args


def test_synth_writes_input_files(roll_dir):
    assert sorted(p.name for p in roll_dir.iterdir()) == ["edges.txt", "labels.csv", "lens.csv"]
    assert read_edge_list(roll_dir / "edges.txt").n == 150


def test_build_writes_every_format(roll_dir, tmp_path, capsys):
    out = tmp_path / "build"
    assert main(["build", *inputs(roll_dir), "-K", "10", "--out", str(out)]) == 0
    assert "build: completed_success" in capsys.readouterr().out
    # no error estimates, so no errors.csv
    assert sorted(p.name for p in out.iterdir()) == [
        "map.html", "reebnet.dot", "reebnet.graphml", "reebnet.json",
    ]
    doc = read_reebnet_json(out / "reebnet.json")
    assert doc.metadata["params"]["max_size"] == 10
    assert len(doc.summaries) == doc.reeb.num_nodes


def test_build_without_labels_needs_max_size(roll_dir, tmp_path, capsys):
    code = main(["build", *inputs(roll_dir, labels=False), "--out", str(tmp_path)])
    assert code == 2
    assert "Error: max_size" in capsys.readouterr().err


def test_diagnose_writes_summary(roll_dir, tmp_path):
    out = tmp_path / "diag"
    assert main(["diagnose", *inputs(roll_dir), "-K", "10", "--format", "json,csv", "--out", str(out)]) == 0
    assert sorted(p.name for p in out.iterdir()) == ["errors.csv", "reebnet.json", "summary.json"]
    summary = json.loads((out / "summary.json").read_text())
    assert "auc_gtda" in summary
    assert summary["finalized_sets"] >= summary["reeb_nodes"]
    assert (out / "errors.csv").read_text().count("\n") == 151


def test_output_does_not_depend_on_workers(roll_dir, tmp_path):
    for workers in ("1", "3"):
        args = ["diagnose", *inputs(roll_dir), "-K", "8", "-r", "0.1", "--format", "json,csv",
                "--workers", workers, "--out", str(tmp_path / workers)]
        assert main(args) == 0
    for name in ("reebnet.json", "errors.csv"):
        assert (tmp_path / "1" / name).read_bytes() == (tmp_path / "3" / name).read_bytes()


def test_correction_on_three_classes_fails(roll_dir, tmp_path, capsys):
    code = main(["diagnose", *inputs(roll_dir), "-K", "10", "--correct", "--out", str(tmp_path)])
    assert code == 1
    assert "Label correction needs exactly 2 classes" in capsys.readouterr().err


def test_mapper_baseline(roll_dir, tmp_path):
    out = tmp_path / "mapper"
    assert main(["mapper", *inputs(roll_dir), "--bins", "4", "--format", "json", "--out", str(out)]) == 0
    doc = read_reebnet_json(out / "reebnet.json")
    assert doc.metadata["command"] == "mapper"
    assert doc.metadata["params"]["bins_per_lens"] == 4


def test_knn_command(tmp_path):
    emb = tmp_path / "emb.csv"
    emb.write_text("0.0,0.0\n1.0,0.0\n3.0,0.0\n3.0,1.0\n")
    assert main(["knn", "--embeddings", str(emb), "--knn-k", "1", "--metric", "euclidean",
                 "--out", str(tmp_path / "out")]) == 0
    g = read_edge_list(tmp_path / "out" / "edges.txt")
    assert g.num_edges == 2


def test_missing_lens_is_a_usage_error(roll_dir, tmp_path, capsys):
    code = main(["build", "--graph", str(roll_dir / "edges.txt"), "--lens", str(tmp_path / "nope.csv"),
                 "-K", "5", "--out", str(tmp_path)])
    assert code == 2
    assert "Lens file not found" in capsys.readouterr().err


def test_invalid_parameter_is_a_usage_error(roll_dir, tmp_path):
    assert main(["build", *inputs(roll_dir), "-K", "5", "-r", "1.5", "--out", str(tmp_path)]) == 2


def test_bad_config_is_a_usage_error(tmp_path, capsys):
    config = tmp_path / "bad.yaml"
    config.write_text("gtda:\n  max_size: 0\n")
    assert main(["synth", "swiss-roll", "--config", str(config), "--out", str(tmp_path)]) == 2
    assert "gtda.max_size" in capsys.readouterr().err


def test_exit_code_unwraps_stage_errors():
    usage = StageExecutionError("Stage execution failed: ingest")
    usage.__cause__ = InputFileNotFoundError("missing")
    failure = StageExecutionError("Stage execution failed: ingest")
    failure.__cause__ = InvalidGraphError("bad edge")
    assert exit_code(usage) == 2
    assert exit_code(failure) == 1
    assert exit_code(ConfigurationValidationError("bad")) == 2


def test_run_pipeline_reports_stages(roll_dir, tmp_path):
    orchestrator = Orchestrator()
    cfg = orchestrator.run_config()
    cfg.graph_path = roll_dir / "edges.txt"
    cfg.lens_path = roll_dir / "lens.csv"
    cfg.labels_path = roll_dir / "labels.csv"
    cfg.output_dir = tmp_path
    cfg.formats = ["json"]
    result = orchestrator.run_pipeline(cfg, diagnose=True)

    assert result["status"] == "completed_success"
    assert set(result["stages"]) == {"ingest", "gtda", "diagnose", "report"}
    assert result["stages"]["ingest"]["n"] == 150
    assert result["stages"]["report"]["files"] == ["reebnet.json", "summary.json"]


def write_path_instance(directory, n=10, lenses=2, predicted=None):
    """Path graph with linear lenses and every third vertex in training"""
    directory.mkdir(parents=True, exist_ok=True)
    (directory / "edges.txt").write_text("".join(f"{i} {i + 1}\n" for i in range(n - 1)))
    header = ",".join(f"class_{c}" for c in range(lenses))
    rows = [",".join(f"{(i + c) / n:.3f}" for c in range(lenses)) for i in range(n)]
    (directory / "lens.csv").write_text("\n".join([header, *rows]) + "\n")
    predicted = predicted or [i % 2 for i in range(n)]
    labels = ["vertex_id,predicted,training_label,probability"]
    for i, p in enumerate(predicted):
        training = str(p) if i % 3 == 0 else ""
        labels.append(f"{i},{p},{training},0.7")
    (directory / "labels.csv").write_text("\n".join(labels) + "\n")
    return ["--graph", str(directory / "edges.txt"), "--lens", str(directory / "lens.csv"),
            "--labels", str(directory / "labels.csv")]


def test_fully_excluded_net_still_writes_reports(tmp_path):
    args = write_path_instance(tmp_path / "path")
    out = tmp_path / "diag"
    assert main(["diagnose", *args, "-K", "20", "--format", "json,html,csv", "--out", str(out)]) == 0
    assert sorted(p.name for p in out.iterdir()) == ["errors.csv", "map.html", "reebnet.json", "summary.json"]

    doc = read_reebnet_json(out / "reebnet.json")
    assert doc.reeb.num_nodes == 0
    assert doc.reeb.excluded.tolist() == list(range(10))
    assert doc.metadata["counts"]["excluded_vertices"] == 10
    assert (out / "errors.csv").read_text().count("\n") == 11


def test_class_count_comes_from_lens_columns(tmp_path, capsys):
    # only classes 0 and 1 are ever predicted, but the lens has three columns
    args = write_path_instance(tmp_path / "path", lenses=3)
    code = main(["diagnose", *args, "-K", "3", "--correct", "--out", str(tmp_path / "out")])
    assert code == 1
    assert "Label correction needs exactly 2 classes" in capsys.readouterr().err


def test_labels_beyond_lens_columns_are_rejected(tmp_path, capsys):
    args = write_path_instance(tmp_path / "path", lenses=2, predicted=[0, 1, 2, 0, 1, 0, 1, 0, 1, 0])
    code = main(["build", *args, "-K", "3", "--out", str(tmp_path / "out")])
    assert code == 1
    assert "Predicted class out of range" in capsys.readouterr().err
