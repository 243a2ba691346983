"""
Report Emission

Writes the artifacts of a run and reads them back:

- reebnet.json (format reebnet/1, validated with jsonschema on read)
- reebnet.dot
- reebnet.graphml (through networkx)
- map.html, a static page with an inline SVG of pie-chart nodes
- errors.csv
"""

import html
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import jsonschema
import networkx as nx
import numpy as np

from reebnet.diagnose import ErrorReport, LabelData, write_errors_csv
from reebnet.layout import Layout
from reebnet.reeb import REEBNET_FORMAT, NodeSummary, ReebNet
from utils.helpers import ensure_directory, load_json, save_json
from utils.logger import get_logger
from utils.exceptions import InputFileNotFoundError, ReportFormatError, ReportWriteError

logger = get_logger(__name__)

FORMATS = ("json", "dot", "graphml", "html", "csv")
FILENAMES = {
    "json": "reebnet.json",
    "dot": "reebnet.dot",
    "graphml": "reebnet.graphml",
    "html": "map.html",
    "csv": "errors.csv",
}

PALETTE = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
]
EMPTY_COLOR = "#dddddd"

_ID_LIST = {"type": "array", "items": {"type": "integer", "minimum": 0}}
_PAIRS = {"type": "array", "items": {"type": "array", "items": {"type": "integer"}, "minItems": 2, "maxItems": 2}}

REEBNET_SCHEMA = {
    "type": "object",
    "required": ["format", "n", "nodes", "overlap_edges", "extra_edges", "excluded"],
    "properties": {
        "format": {"const": REEBNET_FORMAT},
        "n": {"type": "integer", "minimum": 0},
        "nodes": {"type": "array", "items": _ID_LIST},
        "paths": {"type": "array"},
        "overlap_edges": _PAIRS,
        "extra_edges": _PAIRS,
        "extra_bridges": _PAIRS,
        "excluded": _ID_LIST,
        "summaries": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["size", "mixture"],
                "properties": {
                    "size": {"type": "integer"},
                    "mixture": {"type": "array", "items": {"type": "number"}},
                    "dominant": {"type": ["integer", "null"]},
                    "empty": {"type": "boolean"},
                },
            },
        },
        "closest_members": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["edge", "members"],
                "properties": {"edge": _PAIRS["items"], "members": _PAIRS["items"]},
            },
        },
        "layout": {"type": "object"},
        "metadata": {"type": "object"},
    },
}


@dataclass
class ReebDocument:
    """Everything reebnet.json holds: the net plus per-node and per-edge annotations"""

    reeb: ReebNet
    summaries: List[NodeSummary] = field(default_factory=list)
    closest: Dict[Tuple[int, int], Tuple[int, int]] = field(default_factory=dict)
    layout: Optional[Layout] = None
    metadata: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        data = self.reeb.to_dict()
        data["summaries"] = [s.to_dict() for s in self.summaries]
        data["closest_members"] = [
            {"edge": [i, j], "members": [a, b]}
            for (i, j), (a, b) in sorted(self.closest.items())
        ]
        if self.layout is not None:
            data["layout"] = self.layout.to_dict()
        data["metadata"] = self.metadata
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ReebDocument":
        layout = None
        if "layout" in data:
            layout = Layout(
                positions=np.asarray(data["layout"]["positions"], dtype=np.float64).reshape(-1, 2),
                boxes=[tuple(b) for b in data["layout"].get("boxes", [])],
            )
        return cls(
            reeb=ReebNet.from_dict(data),
            summaries=[NodeSummary.from_dict(s) for s in data.get("summaries", [])],
            closest={tuple(c["edge"]): tuple(c["members"]) for c in data.get("closest_members", [])},
            layout=layout,
            metadata=data.get("metadata", {}),
        )


def parse_formats(formats: Union[str, Sequence[str], None]) -> List[str]:
    """Normalize a comma list or sequence of format names; None means all"""
    if formats is None:
        return list(FORMATS)
    if isinstance(formats, str):
        formats = [f for f in formats.split(",")]
    chosen = [f.strip().lower() for f in formats if f.strip()]
    unknown = [f for f in chosen if f not in FORMATS]
    if unknown:
        raise ReportFormatError(
            f"Unknown report format: {', '.join(unknown)}",
            {"unknown": unknown, "available": list(FORMATS)}
        )
    return [f for f in FORMATS if f in chosen]


def write_reebnet_json(doc: ReebDocument, path: Union[str, Path]):
    save_json(doc.to_dict(), path)


def read_reebnet_json(path: Union[str, Path]) -> ReebDocument:
    """
    Raises:
        InputFileNotFoundError: If the file does not exist
        ReportFormatError: If the document does not match the reebnet/1 schema
    """
    if not Path(path).exists():
        raise InputFileNotFoundError(f"Reeb net file not found: {path}", {"path": str(path)})
    data = load_json(path)
    try:
        jsonschema.validate(instance=data, schema=REEBNET_SCHEMA)
    except jsonschema.ValidationError as e:
        location = ".".join(str(p) for p in e.absolute_path) or "<root>"
        raise ReportFormatError(
            f"Invalid Reeb net document at {location}: {e.message}",
            {"path": str(path), "location": location}
        )
    return ReebDocument.from_dict(data)


def to_dot(reeb: ReebNet, summaries: Sequence[NodeSummary] = ()) -> str:
    """Undirected DOT; extra edges are dashed red"""
    lines = ["graph reebnet {", "  node [shape=circle];"]
    for i, members in enumerate(reeb.nodes):
        attrs = [f'label="{i}"', f"size={members.size}"]
        if i < len(summaries) and summaries[i].dominant is not None:
            attrs.append(f'fillcolor="{PALETTE[summaries[i].dominant % len(PALETTE)]}"')
            attrs.append("style=filled")
        lines.append(f"  {i} [{', '.join(attrs)}];")
    for i, j in reeb.overlap_edges:
        lines.append(f"  {i} -- {j};")
    for i, j in reeb.extra_edges:
        lines.append(f'  {i} -- {j} [style=dashed, color="red"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


DOT_HEADER = re.compile(r"^\s*(strict\s+)?graph\s+\w*\s*\{\s*$")
DOT_NODE = re.compile(r"^\s*(\d+)\s*(\[[^\]]*\])?\s*;\s*$")
DOT_EDGE = re.compile(r"^\s*(\d+)\s*--\s*(\d+)\s*(\[[^\]]*\])?\s*;\s*$")
DOT_DEFAULTS = re.compile(r"^\s*(node|edge|graph)\s*\[[^\]]*\]\s*;\s*$")


def parse_dot(text: str) -> Tuple[List[int], List[Tuple[int, int]]]:
    """
    Parse the DOT subset to_dot writes: node statements and undirected edges

    Raises:
        ReportFormatError: On any line outside that subset
    """
    lines = [line for line in text.splitlines() if line.strip()]
    if not lines or not DOT_HEADER.match(lines[0]) or lines[-1].strip() != "}":
        raise ReportFormatError("DOT text must be a single undirected graph block")

    nodes, edges = [], []
    for lineno, line in enumerate(lines[1:-1], start=2):
        if DOT_DEFAULTS.match(line):
            continue
        edge = DOT_EDGE.match(line)
        if edge:
            edges.append((int(edge.group(1)), int(edge.group(2))))
            continue
        node = DOT_NODE.match(line)
        if node:
            nodes.append(int(node.group(1)))
            continue
        raise ReportFormatError(f"Unparseable DOT statement on line {lineno}", {"line": lineno, "text": line})

    known = set(nodes)
    dangling = [e for e in edges if e[0] not in known or e[1] not in known]
    if dangling:
        raise ReportFormatError("DOT edge references an undeclared node", {"edge": list(dangling[0])})
    return nodes, edges


def to_networkx(
    reeb: ReebNet,
    summaries: Sequence[NodeSummary] = (),
    layout: Optional[Layout] = None,
    node_errors: Optional[np.ndarray] = None
) -> nx.Graph:
    g = nx.Graph()
    for i, members in enumerate(reeb.nodes):
        attrs = {"size": int(members.size)}
        if i < len(summaries):
            attrs["dominant"] = -1 if summaries[i].dominant is None else int(summaries[i].dominant)
            attrs["mixture"] = ",".join(f"{x:.6g}" for x in summaries[i].mixture)
        if layout is not None:
            attrs["x"] = float(layout.positions[i, 0])
            attrs["y"] = float(layout.positions[i, 1])
        if node_errors is not None:
            attrs["mean_error"] = float(node_errors[i])
        g.add_node(i, **attrs)
    for i, j in reeb.overlap_edges:
        g.add_edge(int(i), int(j), kind="overlap")
    for i, j in reeb.extra_edges:
        g.add_edge(int(i), int(j), kind="extra")
    return g


def read_graphml(path: Union[str, Path]) -> nx.Graph:
    return nx.read_graphml(path, node_type=int)


def node_mean_errors(reeb: ReebNet, errors: ErrorReport) -> np.ndarray:
    return np.array([float(errors.estimated_error[s].mean()) if s.size else 0.0 for s in reeb.nodes])


def _pie_slices(cx: float, cy: float, radius: float, mixture: np.ndarray) -> List[str]:
    parts = []
    nonzero = [(c, float(w)) for c, w in enumerate(mixture) if w > 0]
    if len(nonzero) == 1:
        c = nonzero[0][0]
        return [f'<circle cx="{cx:.3f}" cy="{cy:.3f}" r="{radius:.3f}" fill="{PALETTE[c % len(PALETTE)]}"/>']
    angle = -math.pi / 2
    for c, w in nonzero:
        end = angle + 2 * math.pi * w
        x0, y0 = cx + radius * math.cos(angle), cy + radius * math.sin(angle)
        x1, y1 = cx + radius * math.cos(end), cy + radius * math.sin(end)
        large = 1 if end - angle > math.pi else 0
        parts.append(
            f'<path d="M{cx:.3f},{cy:.3f} L{x0:.3f},{y0:.3f} '
            f'A{radius:.3f},{radius:.3f} 0 {large} 1 {x1:.3f},{y1:.3f} Z" '
            f'fill="{PALETTE[c % len(PALETTE)]}"/>'
        )
        angle = end
    return parts


def to_html(
    reeb: ReebNet,
    layout: Layout,
    summaries: Sequence[NodeSummary],
    node_errors: Optional[np.ndarray] = None,
    title: str = "Reeb net"
) -> str:
    """
    Static page with one SVG: pie-chart nodes sized by member count

    With node_errors, each node gets a red ring whose opacity is its mean
    estimated error.
    """
    scale = 40.0
    pad = 30.0
    pos = layout.positions * np.array([scale, -scale])
    lo = pos.min(axis=0) - pad if len(pos) else np.zeros(2)
    pos = pos - lo
    width, height = (pos.max(axis=0) + pad) if len(pos) else (pad, pad)
    sizes = reeb.sizes()
    radii = 4.0 + 10.0 * np.sqrt(sizes / max(int(sizes.max(initial=1)), 1))

    svg = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0f}" height="{height:.0f}">']
    for i, j in reeb.overlap_edges:
        svg.append(
            f'<line x1="{pos[i, 0]:.3f}" y1="{pos[i, 1]:.3f}" x2="{pos[j, 0]:.3f}" y2="{pos[j, 1]:.3f}" '
            'stroke="#999999" stroke-width="1"/>'
        )
    for i, j in reeb.extra_edges:
        svg.append(
            f'<line x1="{pos[i, 0]:.3f}" y1="{pos[i, 1]:.3f}" x2="{pos[j, 0]:.3f}" y2="{pos[j, 1]:.3f}" '
            'stroke="#d62728" stroke-width="1" stroke-dasharray="4,3"/>'
        )
    for i in range(reeb.num_nodes):
        cx, cy, r = float(pos[i, 0]), float(pos[i, 1]), float(radii[i])
        svg.append(f'<g class="node" id="node-{i}"><title>node {i}: {int(sizes[i])} points</title>')
        if i < len(summaries) and not summaries[i].empty:
            svg.extend(_pie_slices(cx, cy, r, summaries[i].mixture))
        else:
            svg.append(f'<circle cx="{cx:.3f}" cy="{cy:.3f}" r="{r:.3f}" fill="{EMPTY_COLOR}"/>')
        if node_errors is not None:
            svg.append(
                f'<circle class="error" cx="{cx:.3f}" cy="{cy:.3f}" r="{r + 2:.3f}" fill="none" '
                f'stroke="#ff0000" stroke-width="3" stroke-opacity="{float(node_errors[i]):.3f}"/>'
            )
        svg.append("</g>")
    svg.append("</svg>")

    return (
        "<!DOCTYPE html>\n<html>\n<head>\n<meta charset=\"utf-8\">\n"
        f"<title>{html.escape(title)}</title>\n</head>\n<body>\n"
        f"<h1>{html.escape(title)}</h1>\n"
        f"<p>{reeb.num_nodes} nodes, {reeb.overlap_edges.shape[0]} overlap edges, "
        f"{reeb.extra_edges.shape[0]} extra edges, {reeb.excluded.size} excluded points</p>\n"
        + "\n".join(svg)
        + "\n</body>\n</html>\n"
    )


def emit_report(
    reeb: ReebNet,
    layout: Layout,
    summaries: Sequence[NodeSummary],
    errors: Optional[ErrorReport],
    directory: Union[str, Path],
    labels: Optional[LabelData] = None,
    closest: Optional[Dict[Tuple[int, int], Tuple[int, int]]] = None,
    metadata: Optional[Dict[str, Any]] = None,
    formats: Union[str, Sequence[str], None] = None
) -> Dict[str, Path]:
    """
    Write the selected report files into directory

    errors.csv needs both errors and labels and is skipped otherwise; the
    HTML error overlay appears only when errors are given.

    Returns:
        Mapping of format name to written path

    Raises:
        ReportWriteError: If the directory or a file cannot be written
    """
    chosen = parse_formats(formats)
    try:
        out = ensure_directory(directory)
    except OSError as e:
        raise ReportWriteError(f"Cannot create report directory: {directory}", {"path": str(directory), "error": str(e)})

    node_errors = node_mean_errors(reeb, errors) if errors is not None else None
    written: Dict[str, Path] = {}

    try:
        for fmt in chosen:
            path = out / FILENAMES[fmt]
            if fmt == "json":
                doc = ReebDocument(reeb, list(summaries), dict(closest or {}), layout, dict(metadata or {}))
                write_reebnet_json(doc, path)
            elif fmt == "dot":
                path.write_text(to_dot(reeb, summaries))
            elif fmt == "graphml":
                nx.write_graphml(to_networkx(reeb, summaries, layout, node_errors), path)
            elif fmt == "html":
                path.write_text(to_html(reeb, layout, summaries, node_errors))
            elif fmt == "csv":
                if errors is None or labels is None:
                    continue
                write_errors_csv(errors, labels, path)
            written[fmt] = path
    except OSError as e:
        raise ReportWriteError(f"Cannot write report file in {out}", {"path": str(out), "error": str(e)})

    logger.info("Wrote report", extra={"directory": str(out), "files": sorted(p.name for p in written.values())})
    return written
