"""Superpixel graph data model and the SPGRAPH text format.

A graph stores one image's superpixels as nodes (features, centroid, area)
and its adjacency as canonically directed edges: every edge is kept once
with ``p < q`` and carries the spatial relation of p with respect to q.
Graphs are immutable by convention after construction and safe to share
across workers.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DanglingEdgeEndpoint,
    DimensionMismatch,
    DuplicateEdge,
    MalformedHeader,
    NonPositiveBoundaryLength,
)

__all__ = [
    "Relation",
    "SuperpixelNode",
    "Edge",
    "SuperpixelGraph",
    "parse_graph_file",
    "write_graph_file",
    "load_graph",
    "save_graph",
    "format_real",
]


class Relation(enum.IntEnum):
    """Spatial relation of node p with respect to node q on a directed edge."""

    ABOVE = 0
    BELOW = 1
    LEFT_OF = 2
    RIGHT_OF = 3

    @property
    def opposite(self) -> "Relation":
        # 0<->1, 2<->3: flip the low bit.
        return Relation(self.value ^ 1)


@dataclass
class SuperpixelNode:
    id: int
    centroid_row: float
    centroid_col: float
    area: int
    features: np.ndarray

    def __eq__(self, other):
        if not isinstance(other, SuperpixelNode):
            return NotImplemented
        return (
            self.id == other.id
            and self.centroid_row == other.centroid_row
            and self.centroid_col == other.centroid_col
            and self.area == other.area
            and np.array_equal(self.features, other.features)
        )


@dataclass
class Edge:
    p: int
    q: int
    relation: Relation
    boundary_length: float
    pairwise_features: np.ndarray

    def __eq__(self, other):
        if not isinstance(other, Edge):
            return NotImplemented
        return (
            self.p == other.p
            and self.q == other.q
            and self.relation == other.relation
            and self.boundary_length == other.boundary_length
            and np.array_equal(self.pairwise_features, other.pairwise_features)
        )


@dataclass
class SuperpixelGraph:
    nodes: list[SuperpixelNode]
    edges: list[Edge]
    feat_dim: int
    pfeat_dim: int
    num_classes: int
    ground_truth: np.ndarray | None = None

    @property
    def num_nodes(self) -> int:
        return len(self.nodes)

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def feature_matrix(self) -> np.ndarray:
        """Node features stacked as an (n, feat_dim) array."""
        if not self.nodes:
            return np.zeros((0, self.feat_dim))
        return np.stack([n.features for n in self.nodes])

    def areas(self) -> np.ndarray:
        return np.array([n.area for n in self.nodes], dtype=np.int64)

    def edges_by_relation(self) -> dict[Relation, list[Edge]]:
        groups: dict[Relation, list[Edge]] = {r: [] for r in Relation}
        for e in self.edges:
            groups[e.relation].append(e)
        return groups

    def with_labels(self, labels: np.ndarray) -> "SuperpixelGraph":
        """Copy of this graph carrying ``labels`` as its label block."""
        labels = np.asarray(labels, dtype=np.int64)
        g = SuperpixelGraph(
            nodes=self.nodes,
            edges=self.edges,
            feat_dim=self.feat_dim,
            pfeat_dim=self.pfeat_dim,
            num_classes=self.num_classes,
            ground_truth=labels,
        )
        _validate(g)
        return g

    def __eq__(self, other):
        if not isinstance(other, SuperpixelGraph):
            return NotImplemented
        gt_equal = (self.ground_truth is None) == (other.ground_truth is None)
        if gt_equal and self.ground_truth is not None:
            gt_equal = np.array_equal(self.ground_truth, other.ground_truth)
        return (
            gt_equal
            and self.feat_dim == other.feat_dim
            and self.pfeat_dim == other.pfeat_dim
            and self.num_classes == other.num_classes
            and self.nodes == other.nodes
            and self.edges == other.edges
        )


def format_real(x: float) -> str:
    """Decimal text that round-trips the float64 value exactly."""
    return repr(float(x))


def _validate(g: SuperpixelGraph) -> None:
    n = len(g.nodes)
    for i, node in enumerate(g.nodes):
        if node.id != i:
            raise MalformedHeader(f"node ids must be dense 0..{n - 1}, found {node.id}")
        if node.area < 1:
            raise DimensionMismatch(f"node {i} has area {node.area} < 1")
        if len(node.features) != g.feat_dim:
            raise DimensionMismatch(
                f"node {i} has {len(node.features)} features, expected {g.feat_dim}"
            )
    seen: set[tuple[int, int]] = set()
    for e in g.edges:
        if e.p == e.q:
            raise DuplicateEdge(f"self-loop on node {e.p}")
        if not (0 <= e.p < n) or not (0 <= e.q < n):
            raise DanglingEdgeEndpoint(f"edge ({e.p},{e.q}) references a missing node")
        if e.p > e.q:
            raise DuplicateEdge(f"edge ({e.p},{e.q}) must be stored with p < q")
        if (e.p, e.q) in seen:
            raise DuplicateEdge(f"duplicate edge ({e.p},{e.q})")
        seen.add((e.p, e.q))
        if not e.boundary_length > 0:
            raise NonPositiveBoundaryLength(
                f"edge ({e.p},{e.q}) has boundary length {e.boundary_length}"
            )
        if len(e.pairwise_features) != g.pfeat_dim:
            raise DimensionMismatch(
                f"edge ({e.p},{e.q}) has {len(e.pairwise_features)} pairwise features,"
                f" expected {g.pfeat_dim}"
            )
    if g.ground_truth is not None:
        if len(g.ground_truth) != n:
            raise DimensionMismatch(
                f"label block has {len(g.ground_truth)} entries for {n} nodes"
            )
        if n and (g.ground_truth.min() < 0 or g.ground_truth.max() >= g.num_classes):
            raise DimensionMismatch("label outside 0..K-1")


def _meaningful_lines(text: str):
    """Yield (line_number, tokens) skipping blank and comment lines."""
    for lineno, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.strip()
        if not stripped or stripped.startswith("#"):
            continue
        yield lineno, stripped.split()


def _parse_int(tok: str, what: str, lineno: int) -> int:
    try:
        return int(tok)
    except ValueError:
        raise MalformedHeader(f"expected integer {what}, got {tok!r}", lineno) from None


def _parse_real(tok: str, what: str, lineno: int) -> float:
    try:
        return float(tok)
    except ValueError:
        raise MalformedHeader(f"expected number {what}, got {tok!r}", lineno) from None


def parse_graph_file(data: str | bytes) -> SuperpixelGraph:
    """Parse SPGRAPH text into a validated graph.

    Raises MalformedHeader, DanglingEdgeEndpoint, DuplicateEdge,
    DimensionMismatch or NonPositiveBoundaryLength; messages carry the
    offending 1-based line number.
    """
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    lines = _meaningful_lines(data)

    def next_line(expect: str):
        try:
            return next(lines)
        except StopIteration:
            raise MalformedHeader(f"unexpected end of file, expected {expect}") from None

    lineno, toks = next_line("SPGRAPH header")
    if toks != ["SPGRAPH", "1"]:
        raise MalformedHeader("file must start with 'SPGRAPH 1'", lineno)

    lineno, toks = next_line("nodes header")
    if len(toks) != 6 or toks[0] != "nodes" or toks[2] != "feat_dim" or toks[4] != "classes":
        raise MalformedHeader("expected 'nodes <n> feat_dim <d> classes <K>'", lineno)
    n = _parse_int(toks[1], "node count", lineno)
    feat_dim = _parse_int(toks[3], "feat_dim", lineno)
    num_classes = _parse_int(toks[5], "class count", lineno)
    if n < 0 or feat_dim < 0 or num_classes < 0:
        raise MalformedHeader("counts must be non-negative", lineno)

    nodes: list[SuperpixelNode | None] = [None] * n
    for _ in range(n):
        lineno, toks = next_line("node line")
        if toks[0] != "node" or len(toks) != 5 + feat_dim:
            raise MalformedHeader(
                f"expected 'node <id> <row> <col> <area> <{feat_dim} features>'", lineno
            )
        nid = _parse_int(toks[1], "node id", lineno)
        if not (0 <= nid < n):
            raise MalformedHeader(f"node id {nid} outside 0..{n - 1}", lineno)
        if nodes[nid] is not None:
            raise MalformedHeader(f"node id {nid} repeated", lineno)
        area = _parse_int(toks[4], "area", lineno)
        if area < 1:
            raise DimensionMismatch(f"node {nid} has area {area} < 1", lineno)
        feats = np.array(
            [_parse_real(t, "feature", lineno) for t in toks[5:]], dtype=np.float64
        )
        nodes[nid] = SuperpixelNode(
            id=nid,
            centroid_row=_parse_real(toks[2], "centroid row", lineno),
            centroid_col=_parse_real(toks[3], "centroid col", lineno),
            area=area,
            features=feats,
        )

    lineno, toks = next_line("edges header")
    if len(toks) != 4 or toks[0] != "edges" or toks[2] != "pfeat_dim":
        raise MalformedHeader("expected 'edges <m> pfeat_dim <e>'", lineno)
    m = _parse_int(toks[1], "edge count", lineno)
    pfeat_dim = _parse_int(toks[3], "pfeat_dim", lineno)
    if m < 0 or pfeat_dim < 0:
        raise MalformedHeader("counts must be non-negative", lineno)

    edges: list[Edge] = []
    seen: set[tuple[int, int]] = set()
    for _ in range(m):
        lineno, toks = next_line("edge line")
        if toks[0] != "edge" or len(toks) != 5 + pfeat_dim:
            raise MalformedHeader(
                f"expected 'edge <p> <q> <relation> <length> <{pfeat_dim} features>'",
                lineno,
            )
        p = _parse_int(toks[1], "edge endpoint", lineno)
        q = _parse_int(toks[2], "edge endpoint", lineno)
        if p == q:
            raise DuplicateEdge(f"self-loop on node {p}", lineno)
        if not (0 <= p < n) or not (0 <= q < n):
            raise DanglingEdgeEndpoint(f"edge ({p},{q}) references a missing node", lineno)
        if p > q:
            raise DuplicateEdge(f"edge ({p},{q}) must be stored with p < q", lineno)
        if (p, q) in seen:
            raise DuplicateEdge(f"duplicate edge ({p},{q})", lineno)
        seen.add((p, q))
        rel = _parse_int(toks[3], "relation code", lineno)
        if not (0 <= rel <= 3):
            raise DimensionMismatch(f"relation code {rel} outside 0..3", lineno)
        length = _parse_real(toks[4], "boundary length", lineno)
        if not length > 0:
            raise NonPositiveBoundaryLength(
                f"edge ({p},{q}) has boundary length {length}", lineno
            )
        pfeats = np.array(
            [_parse_real(t, "pairwise feature", lineno) for t in toks[5:]],
            dtype=np.float64,
        )
        edges.append(
            Edge(p=p, q=q, relation=Relation(rel), boundary_length=length, pairwise_features=pfeats)
        )

    labels: np.ndarray | None = None
    label_lines = list(lines)
    for lineno, toks in label_lines:
        # Diagnose a stray edge line precisely before the generic label checks.
        if toks[0] == "edge":
            if len(toks) >= 3 and toks[1] == toks[2]:
                raise DuplicateEdge(f"self-loop on node {toks[1]}", lineno)
            raise MalformedHeader("edge line outside the declared edge block", lineno)
    if label_lines:
        if len(label_lines) != n:
            raise MalformedHeader(
                f"label block must have one line per node ({len(label_lines)} for {n} nodes)",
                label_lines[0][0],
            )
        labels = np.zeros(n, dtype=np.int64)
        got = np.zeros(n, dtype=bool)
        for lineno, toks in label_lines:
            if toks[0] != "label" or len(toks) != 3:
                raise MalformedHeader("expected 'label <id> <class>'", lineno)
            nid = _parse_int(toks[1], "node id", lineno)
            cls = _parse_int(toks[2], "class", lineno)
            if not (0 <= nid < n):
                raise DanglingEdgeEndpoint(f"label for missing node {nid}", lineno)
            if got[nid]:
                raise MalformedHeader(f"label for node {nid} repeated", lineno)
            if not (0 <= cls < num_classes):
                raise DimensionMismatch(f"class {cls} outside 0..{num_classes - 1}", lineno)
            got[nid] = True
            labels[nid] = cls

    g = SuperpixelGraph(
        nodes=nodes,  # type: ignore[arg-type]
        edges=edges,
        feat_dim=feat_dim,
        pfeat_dim=pfeat_dim,
        num_classes=num_classes,
        ground_truth=labels,
    )
    _validate(g)
    return g


def write_graph_file(g: SuperpixelGraph) -> str:
    """Serialize a graph; parse_graph_file(write_graph_file(g)) == g exactly."""
    _validate(g)
    out = ["SPGRAPH 1", f"nodes {g.num_nodes} feat_dim {g.feat_dim} classes {g.num_classes}"]
    for node in g.nodes:
        parts = [
            "node",
            str(node.id),
            format_real(node.centroid_row),
            format_real(node.centroid_col),
            str(node.area),
        ]
        parts.extend(format_real(v) for v in node.features)
        out.append(" ".join(parts))
    out.append(f"edges {g.num_edges} pfeat_dim {g.pfeat_dim}")
    for e in g.edges:
        parts = [
            "edge",
            str(e.p),
            str(e.q),
            str(int(e.relation)),
            format_real(e.boundary_length),
        ]
        parts.extend(format_real(v) for v in e.pairwise_features)
        out.append(" ".join(parts))
    if g.ground_truth is not None:
        for i, cls in enumerate(g.ground_truth):
            out.append(f"label {i} {int(cls)}")
    return "\n".join(out) + "\n"


def load_graph(path) -> SuperpixelGraph:
    with open(path, "rb") as f:
        return parse_graph_file(f.read())


def save_graph(g: SuperpixelGraph, path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write(write_graph_file(g))
