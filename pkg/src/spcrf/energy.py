"""CRF energy over superpixel graphs and spatial co-occurrence statistics.

The energy is linear in the stacked weights: a block-indicator unary term
summed over nodes plus a pairwise term summed over edges. Each edge
contributes its boundary length times its pairwise feature vector, gated by
a label-disagreement indicator, placed in the sub-block of its spatial
relation, and (in mutex / co-occurrence modes) scaled by a statistics-driven
multiplier.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatch,
    GraphFormatError,
    MalformedHeader,
    MissingGroundTruth,
    MissingTable,
)
from .features import UnaryFeatureMap
from .graph import Relation, SuperpixelGraph, format_real

__all__ = [
    "WeightVector",
    "PairwiseMode",
    "CoOccurrenceTable",
    "build_cooccurrence",
    "joint_feature_map",
    "energy",
    "unary_potentials",
    "edge_cost_tables",
    "clamp_value",
    "pairwise_dim",
    "parse_cooccur_file",
    "write_cooccur_file",
    "load_cooccurrence",
    "save_cooccurrence",
]

NUM_RELATIONS = 4


@dataclass
class WeightVector:
    """Learned parameters split into the unary and pairwise blocks."""

    unary: np.ndarray
    pairwise: np.ndarray

    def __post_init__(self):
        self.unary = np.asarray(self.unary, dtype=np.float64)
        self.pairwise = np.asarray(self.pairwise, dtype=np.float64)
        if not np.isfinite(self.unary).all() or not np.isfinite(self.pairwise).all():
            raise ValueError("weights must be finite")

    @property
    def stacked(self) -> np.ndarray:
        return np.concatenate([self.unary, self.pairwise])

    @classmethod
    def zeros(cls, unary_dim: int, pairwise_dim: int) -> "WeightVector":
        return cls(np.zeros(unary_dim), np.zeros(pairwise_dim))

    def __eq__(self, other):
        if not isinstance(other, WeightVector):
            return NotImplemented
        return np.array_equal(self.unary, other.unary) and np.array_equal(
            self.pairwise, other.pairwise
        )


class PairwiseMode(enum.Enum):
    PLAIN = "plain"
    MUTEX = "mutex"
    COOCCUR = "cooccur"


def pairwise_dim(pfeat_dim: int, relation_blocks: bool = True) -> int:
    return (NUM_RELATIONS * pfeat_dim) if relation_blocks else pfeat_dim


@dataclass
class CoOccurrenceTable:
    """Per-image co-existence and spatial-adjacency counts over a corpus.

    ``coexist[a, b]`` is the number of images in which classes a and b both
    appear (symmetric); ``relation_counts[i, a, b]`` counts images where some
    a-labelled superpixel is adjacent to a b-labelled one in spatial relation
    i. Cross-relation symmetry holds by construction:
    ``relation_counts[i, a, b] == relation_counts[opposite(i), b, a]``.
    """

    num_classes: int
    coexist: np.ndarray  # (K, K) int64
    relation_counts: np.ndarray  # (4, K, K) int64

    def __post_init__(self):
        self.coexist = np.asarray(self.coexist, dtype=np.int64)
        self.relation_counts = np.asarray(self.relation_counts, dtype=np.int64)
        k = self.num_classes
        if self.coexist.shape != (k, k) or self.relation_counts.shape != (4, k, k):
            raise DimensionMismatch("co-occurrence table shapes inconsistent with K")

    def validate(self) -> None:
        if (self.relation_counts < 0).any() or (self.coexist < 0).any():
            raise ValueError("counts must be non-negative")
        if not np.array_equal(self.coexist, self.coexist.T):
            raise ValueError("co-existence counts must be symmetric")
        if (self.relation_counts > self.coexist[None, :, :]).any():
            raise ValueError("relation counts cannot exceed co-existence counts")
        for rel in Relation:
            if not np.array_equal(
                self.relation_counts[rel], self.relation_counts[rel.opposite].T
            ):
                raise ValueError("relation counts must satisfy opposite-transpose symmetry")

    def multipliers(self, mode: PairwiseMode, clamp: float) -> np.ndarray:
        """(4, K, K) edge multipliers g_i; diagonal is zero by convention."""
        k = self.num_classes
        if mode == PairwiseMode.PLAIN:
            g = np.ones((NUM_RELATIONS, k, k))
        elif mode == PairwiseMode.MUTEX:
            g = np.where(self.relation_counts > 0, 1.0, clamp)
        elif mode == PairwiseMode.COOCCUR:
            seen = self.relation_counts > 0
            with np.errstate(divide="ignore", invalid="ignore"):
                g = np.where(
                    seen,
                    self.coexist[None].astype(np.float64)
                    / np.where(seen, self.relation_counts, 1),
                    clamp,
                )
        else:  # pragma: no cover - exhaustive enum
            raise ValueError(mode)
        eye = np.eye(k, dtype=bool)
        g[:, eye] = 0.0
        return g

    def forbidden(self, relation: Relation) -> np.ndarray:
        """(K, K) boolean: label pairs never observed in this relation."""
        out = self.relation_counts[relation] == 0
        np.fill_diagonal(out, False)
        return out


def build_cooccurrence(corpus: list[SuperpixelGraph]) -> CoOccurrenceTable:
    """Count per image (set semantics): each image contributes at most one to
    every co-existence and relation count it realizes."""
    if not corpus:
        raise MissingGroundTruth("corpus is empty")
    k = corpus[0].num_classes
    coexist = np.zeros((k, k), dtype=np.int64)
    rel_counts = np.zeros((NUM_RELATIONS, k, k), dtype=np.int64)
    for g in corpus:
        if g.ground_truth is None:
            raise MissingGroundTruth("graph without ground truth in corpus")
        if g.num_classes != k:
            raise DimensionMismatch("corpus graphs disagree on class count")
        labels = g.ground_truth
        present = sorted(set(int(c) for c in labels))
        for i, a in enumerate(present):
            for b in present[i + 1 :]:
                coexist[a, b] += 1
                coexist[b, a] += 1
        events = set()
        for e in g.edges:
            a, b = int(labels[e.p]), int(labels[e.q])
            if a == b:
                continue
            events.add((int(e.relation), a, b))
            events.add((int(e.relation.opposite), b, a))
        for rel, a, b in events:
            rel_counts[rel, a, b] += 1
    table = CoOccurrenceTable(num_classes=k, coexist=coexist, relation_counts=rel_counts)
    table.validate()
    return table


# ---------------------------------------------------------------------------
# Potentials
# ---------------------------------------------------------------------------


def unary_potentials(g: SuperpixelGraph, w: WeightVector, fmap: UnaryFeatureMap) -> np.ndarray:
    """(n, K) table of per-node label energies."""
    k = fmap.num_classes
    bd = fmap.block_dim
    if len(w.unary) != fmap.unary_dim:
        raise DimensionMismatch(
            f"unary weights have {len(w.unary)} dims, map needs {fmap.unary_dim}"
        )
    if g.num_nodes == 0:
        return np.zeros((0, k))
    payload = fmap.payload(g.feature_matrix())  # (n, bd)
    return payload @ w.unary.reshape(k, bd).T


def clamp_value(g: SuperpixelGraph, w: WeightVector, fmap: UnaryFeatureMap) -> float:
    """Finite stand-in for the infinite forbidden-pair multiplier.

    Large enough that a single forbidden edge outweighs any achievable unary
    rearrangement on the graph.
    """
    u = unary_potentials(g, w, fmap)
    peak = float(np.abs(u).max()) if u.size else 0.0
    return 1e6 * (1.0 + peak)


def _edge_base(g: SuperpixelGraph, w: WeightVector, relation_blocks: bool) -> np.ndarray:
    """Per-edge scalar L_pq * <w2 block(rel), pairwise features>."""
    dp = pairwise_dim(g.pfeat_dim, relation_blocks)
    if len(w.pairwise) != dp:
        raise DimensionMismatch(
            f"pairwise weights have {len(w.pairwise)} dims, graph needs {dp}"
        )
    base = np.zeros(g.num_edges)
    e_dim = g.pfeat_dim
    for i, e in enumerate(g.edges):
        if relation_blocks:
            block = w.pairwise[int(e.relation) * e_dim : (int(e.relation) + 1) * e_dim]
        else:
            block = w.pairwise
        base[i] = e.boundary_length * float(block @ e.pairwise_features)
    return base


def edge_cost_tables(
    g: SuperpixelGraph,
    w: WeightVector,
    fmap: UnaryFeatureMap,
    mode: PairwiseMode = PairwiseMode.PLAIN,
    cooccur: CoOccurrenceTable | None = None,
    alpha: float = 1.0,
    relation_blocks: bool = True,
) -> np.ndarray:
    """(m, K, K) per-edge label-pair energies, diagonal zero."""
    k = fmap.num_classes
    if mode != PairwiseMode.PLAIN and cooccur is None:
        raise MissingTable(f"{mode.value} mode requires a co-occurrence table")
    base = _edge_base(g, w, relation_blocks)
    if cooccur is not None and mode != PairwiseMode.PLAIN:
        clamp = clamp_value(g, w, fmap)
        mult = cooccur.multipliers(mode, clamp)
    else:
        mult = np.ones((NUM_RELATIONS, k, k))
        mult[:, np.eye(k, dtype=bool)] = 0.0
    tables = np.zeros((g.num_edges, k, k))
    for i, e in enumerate(g.edges):
        tables[i] = alpha * base[i] * mult[int(e.relation)]
    return tables


def joint_feature_map(
    g: SuperpixelGraph,
    labels: np.ndarray,
    fmap: UnaryFeatureMap,
    relation_blocks: bool = True,
) -> np.ndarray:
    """Summed feature map of a labelled graph, length unary_dim + pairwise_dim."""
    psi_u, psi_p = _joint_parts(g, labels, fmap, relation_blocks=relation_blocks)
    return np.concatenate([psi_u, psi_p])


def _joint_parts(
    g: SuperpixelGraph,
    labels: np.ndarray,
    fmap: UnaryFeatureMap,
    mode: PairwiseMode = PairwiseMode.PLAIN,
    cooccur: CoOccurrenceTable | None = None,
    clamp: float = 1.0,
    relation_blocks: bool = True,
) -> tuple[np.ndarray, np.ndarray]:
    labels = np.asarray(labels, dtype=np.int64)
    if len(labels) != g.num_nodes:
        raise DimensionMismatch(
            f"labeling length {len(labels)} != node count {g.num_nodes}"
        )
    k = fmap.num_classes
    bd = fmap.block_dim
    unary = np.zeros((k, bd))
    if g.num_nodes:
        payload = fmap.payload(g.feature_matrix())
        np.add.at(unary, labels, payload)

    dp = pairwise_dim(g.pfeat_dim, relation_blocks)
    pair = np.zeros(dp)
    if g.num_edges and dp:
        if mode != PairwiseMode.PLAIN:
            mult = cooccur.multipliers(mode, clamp)
        else:
            mult = None
        e_dim = g.pfeat_dim
        for e in g.edges:
            a, b = int(labels[e.p]), int(labels[e.q])
            if a == b:
                continue
            contrib = e.boundary_length * e.pairwise_features
            if mult is not None:
                contrib = contrib * mult[int(e.relation), a, b]
            if relation_blocks:
                lo = int(e.relation) * e_dim
                pair[lo : lo + e_dim] += contrib
            else:
                pair += contrib
    return unary.reshape(-1), pair


def energy(
    g: SuperpixelGraph,
    labels: np.ndarray,
    w: WeightVector,
    fmap: UnaryFeatureMap,
    mode: PairwiseMode = PairwiseMode.PLAIN,
    cooccur: CoOccurrenceTable | None = None,
    alpha: float = 1.0,
    relation_blocks: bool = True,
) -> float:
    """<w1, unary part> + alpha * <w2, mode-scaled pairwise part>."""
    if mode != PairwiseMode.PLAIN and cooccur is None:
        raise MissingTable(f"{mode.value} mode requires a co-occurrence table")
    clamp = 1.0
    if mode != PairwiseMode.PLAIN:
        clamp = clamp_value(g, w, fmap)
    psi_u, psi_p = _joint_parts(
        g, labels, fmap, mode=mode, cooccur=cooccur, clamp=clamp,
        relation_blocks=relation_blocks,
    )
    if len(w.unary) != len(psi_u) or len(w.pairwise) != len(psi_p):
        raise DimensionMismatch("weight dimensions do not match the graph/map")
    return float(np.dot(w.unary, psi_u) + alpha * np.dot(w.pairwise, psi_p))


# ---------------------------------------------------------------------------
# COOCCUR file format
# ---------------------------------------------------------------------------


def write_cooccur_file(table: CoOccurrenceTable) -> str:
    table.validate()
    out = ["COOCCUR 1", f"classes {table.num_classes}"]
    k = table.num_classes
    for a in range(k):
        for b in range(k):
            if a == b or table.coexist[a, b] == 0:
                continue
            counts = " ".join(str(int(table.relation_counts[i, a, b])) for i in range(4))
            out.append(f"pair {a} {b} {int(table.coexist[a, b])} {counts}")
    return "\n".join(out) + "\n"


def parse_cooccur_file(data: str | bytes) -> CoOccurrenceTable:
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    lines = [
        (no, raw.strip().split())
        for no, raw in enumerate(data.splitlines(), start=1)
        if raw.strip() and not raw.strip().startswith("#")
    ]
    if not lines or lines[0][1] != ["COOCCUR", "1"]:
        raise MalformedHeader("file must start with 'COOCCUR 1'", lines[0][0] if lines else None)
    if len(lines) < 2 or lines[1][1][0] != "classes" or len(lines[1][1]) != 2:
        raise MalformedHeader("expected 'classes <K>'", lines[1][0] if len(lines) > 1 else None)
    try:
        k = int(lines[1][1][1])
    except ValueError:
        raise MalformedHeader("expected integer class count", lines[1][0]) from None
    coexist = np.zeros((k, k), dtype=np.int64)
    rel = np.zeros((4, k, k), dtype=np.int64)
    for no, toks in lines[2:]:
        if toks[0] != "pair" or len(toks) != 8:
            raise MalformedHeader("expected 'pair <a> <b> <N> <N1> <N2> <N3> <N4>'", no)
        try:
            vals = [int(t) for t in toks[1:]]
        except ValueError:
            raise MalformedHeader("pair line must be integers", no) from None
        a, b, n = vals[0], vals[1], vals[2]
        if not (0 <= a < k and 0 <= b < k) or a == b:
            raise DimensionMismatch(f"invalid class pair ({a},{b})", no)
        coexist[a, b] = n
        for i in range(4):
            rel[i, a, b] = vals[3 + i]
    table = CoOccurrenceTable(num_classes=k, coexist=coexist, relation_counts=rel)
    try:
        table.validate()
    except ValueError as exc:
        raise GraphFormatError(f"inconsistent co-occurrence table: {exc}") from exc
    return table


def load_cooccurrence(path) -> CoOccurrenceTable:
    with open(path, "rb") as f:
        return parse_cooccur_file(f.read())


def save_cooccurrence(table: CoOccurrenceTable, path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write(write_cooccur_file(table))
