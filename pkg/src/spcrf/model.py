"""MODEL file: learned weights plus everything needed to reapply them.

Beyond the weight blocks, the file carries the unary payload mode, the
feature standardization statistics, the embedded one-vs-all SVM, the
pairwise channel order, the pairwise block layout and the export-time
inference mode and trade-off.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .energy import PairwiseMode, WeightVector, pairwise_dim
from .errors import DimensionMismatch, MalformedHeader
from .features import LinearSvmModel, UnaryFeatureMap, UnaryMode
from .graph import format_real

__all__ = ["SegmentationModel", "parse_model_file", "write_model_file", "load_model", "save_model"]


@dataclass
class SegmentationModel:
    num_classes: int
    feat_dim: int
    pfeat_dim: int
    weights: WeightVector
    unary_mode: UnaryMode = UnaryMode.RAW_INDICATOR
    svm: LinearSvmModel | None = None
    mean: np.ndarray | None = None
    scale: np.ndarray | None = None
    relation_blocks: bool = True
    mode: PairwiseMode = PairwiseMode.PLAIN
    alpha: float = 1.0
    pairwise_channels: tuple[str, ...] = ()

    def __post_init__(self):
        fmap = self.unary_feature_map()
        if len(self.weights.unary) != fmap.unary_dim:
            raise DimensionMismatch(
                f"unary weights: {len(self.weights.unary)} != {fmap.unary_dim}"
            )
        dp = pairwise_dim(self.pfeat_dim, self.relation_blocks)
        if len(self.weights.pairwise) != dp:
            raise DimensionMismatch(
                f"pairwise weights: {len(self.weights.pairwise)} != {dp}"
            )

    def unary_feature_map(self) -> UnaryFeatureMap:
        return UnaryFeatureMap(
            num_classes=self.num_classes,
            feat_dim=self.feat_dim,
            mode=self.unary_mode,
            svm=self.svm,
            mean=self.mean,
            scale=self.scale,
        )


def _vector_line(values: np.ndarray) -> str:
    return " ".join(format_real(v) for v in values)


def write_model_file(model: SegmentationModel) -> str:
    w = model.weights
    out = [
        "MODEL 1",
        f"classes {model.num_classes} unary_dim {len(w.unary)} pairwise_dim {len(w.pairwise)}",
        _vector_line(w.unary),
        _vector_line(w.pairwise),
        f"feat_dim {model.feat_dim} pfeat_dim {model.pfeat_dim}",
        f"unary_mode {model.unary_mode.value}",
        f"pairwise_layout {'blocked' if model.relation_blocks else 'single'}",
        f"mode {model.mode.value} alpha {format_real(model.alpha)}",
    ]
    if model.pairwise_channels:
        out.append("pairwise_channels " + " ".join(model.pairwise_channels))
    if model.mean is not None:
        out.append(f"standardize {model.feat_dim}")
        out.append(_vector_line(model.mean))
        out.append(_vector_line(model.scale))
    if model.svm is not None:
        out.append(f"svm {model.svm.num_classes} {model.svm.feat_dim}")
        for k in range(model.svm.num_classes):
            row = np.concatenate([model.svm.weights[k], [model.svm.biases[k]]])
            out.append(_vector_line(row))
    return "\n".join(out) + "\n"


def parse_model_file(data: str | bytes) -> SegmentationModel:
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    lines = [
        (no, raw.rstrip("\n"))
        for no, raw in enumerate(data.splitlines(), start=1)
        if raw.strip() and not raw.strip().startswith("#")
    ]
    idx = 0

    def take(expect: str) -> tuple[int, list[str]]:
        nonlocal idx
        if idx >= len(lines):
            raise MalformedHeader(f"unexpected end of model file, expected {expect}")
        no, raw = lines[idx]
        idx += 1
        return no, raw.split()

    no, toks = take("MODEL header")
    if toks != ["MODEL", "1"]:
        raise MalformedHeader("file must start with 'MODEL 1'", no)
    no, toks = take("dimensions")
    if len(toks) != 6 or toks[0] != "classes" or toks[2] != "unary_dim" or toks[4] != "pairwise_dim":
        raise MalformedHeader("expected 'classes <K> unary_dim <du> pairwise_dim <dp>'", no)
    num_classes, du, dp = int(toks[1]), int(toks[3]), int(toks[5])

    no, toks = take("unary weights")
    if len(toks) != du:
        # An empty weight line is dropped by the blank filter, so re-sync.
        if du == 0:
            idx -= 1
            toks = []
        else:
            raise DimensionMismatch(f"expected {du} unary weights, got {len(toks)}", no)
    w_unary = np.array([float(t) for t in toks])
    no, toks = take("pairwise weights") if dp else (no, [])
    if dp and len(toks) != dp:
        raise DimensionMismatch(f"expected {dp} pairwise weights, got {len(toks)}", no)
    w_pair = np.array([float(t) for t in toks])

    feat_dim = du  # overwritten by the feat_dim line below
    pfeat_dim = dp
    unary_mode = UnaryMode.RAW_INDICATOR
    relation_blocks = True
    mode = PairwiseMode.PLAIN
    alpha = 1.0
    channels: tuple[str, ...] = ()
    mean = scale = None
    svm = None
    while idx < len(lines):
        no, toks = take("section")
        key = toks[0]
        if key == "feat_dim":
            feat_dim, pfeat_dim = int(toks[1]), int(toks[3])
        elif key == "unary_mode":
            unary_mode = UnaryMode(toks[1])
        elif key == "pairwise_layout":
            relation_blocks = toks[1] == "blocked"
        elif key == "mode":
            mode = PairwiseMode(toks[1])
            alpha = float(toks[3])
        elif key == "pairwise_channels":
            channels = tuple(toks[1:])
        elif key == "standardize":
            d = int(toks[1])
            _, mtoks = take("standardize mean")
            _, stoks = take("standardize scale")
            if len(mtoks) != d or len(stoks) != d:
                raise DimensionMismatch("standardization vectors have wrong length", no)
            mean = np.array([float(t) for t in mtoks])
            scale = np.array([float(t) for t in stoks])
        elif key == "svm":
            k, d = int(toks[1]), int(toks[2])
            weights = np.zeros((k, d))
            biases = np.zeros(k)
            for row in range(k):
                rno, rtoks = take("svm weight row")
                if len(rtoks) != d + 1:
                    raise DimensionMismatch(
                        f"svm row needs {d} weights plus bias", rno
                    )
                vals = [float(t) for t in rtoks]
                weights[row] = vals[:-1]
                biases[row] = vals[-1]
            svm = LinearSvmModel(weights=weights, biases=biases)
        else:
            raise MalformedHeader(f"unknown model section {key!r}", no)

    return SegmentationModel(
        num_classes=num_classes,
        feat_dim=feat_dim,
        pfeat_dim=pfeat_dim,
        weights=WeightVector(w_unary, w_pair),
        unary_mode=unary_mode,
        svm=svm,
        mean=mean,
        scale=scale,
        relation_blocks=relation_blocks,
        mode=mode,
        alpha=alpha,
        pairwise_channels=channels,
    )


def load_model(path) -> SegmentationModel:
    with open(path, "rb") as f:
        return parse_model_file(f.read())


def save_model(model: SegmentationModel, path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write(write_model_file(model))
