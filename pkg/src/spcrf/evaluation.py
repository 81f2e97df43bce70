"""Segmentation metrics: global accuracy, per-class accuracy, foreground
intersection-over-union and F-score, accumulated over superpixel graphs with
areas as pixel multiplicities."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyMatrix, LengthMismatch, MissingGroundTruth
from .graph import SuperpixelGraph

__all__ = ["VOID_LABEL", "ConfusionMatrix", "accumulate", "MetricsReport", "metrics",
           "render_text", "render_csv"]

VOID_LABEL = 255


@dataclass
class ConfusionMatrix:
    """K x K pixel counts; rows are ground truth, columns are predictions."""

    counts: np.ndarray

    def __post_init__(self):
        self.counts = np.asarray(self.counts, dtype=np.int64)
        if self.counts.ndim != 2 or self.counts.shape[0] != self.counts.shape[1]:
            raise ValueError("confusion matrix must be square")
        if (self.counts < 0).any():
            raise ValueError("confusion matrix entries must be non-negative")

    @classmethod
    def zeros(cls, num_classes: int) -> "ConfusionMatrix":
        return cls(np.zeros((num_classes, num_classes), dtype=np.int64))

    @property
    def num_classes(self) -> int:
        return self.counts.shape[0]

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def merged(self, other: "ConfusionMatrix") -> "ConfusionMatrix":
        return ConfusionMatrix(self.counts + other.counts)


def accumulate(
    g: SuperpixelGraph, y_pred: np.ndarray, cm: ConfusionMatrix
) -> ConfusionMatrix:
    """Add one graph's area-weighted counts into ``cm`` (mutates and returns it).

    Nodes whose ground truth is the void label are ignored.
    """
    if g.ground_truth is None:
        raise MissingGroundTruth("graph has no ground truth to evaluate against")
    y_pred = np.asarray(y_pred, dtype=np.int64)
    if len(y_pred) != g.num_nodes:
        raise LengthMismatch(
            f"prediction length {len(y_pred)} != node count {g.num_nodes}"
        )
    for node, truth, pred in zip(g.nodes, g.ground_truth, y_pred):
        if truth == VOID_LABEL:
            continue
        cm.counts[int(truth), int(pred)] += node.area
    return cm


@dataclass
class MetricsReport:
    global_accuracy: float
    per_class_accuracy: dict[int, float]
    average_accuracy: float
    total_pixels: int
    foreground: int | None = None
    foreground_iou: float | None = None
    background_iou: float | None = None
    fg_bg_mean_iou: float | None = None
    precision: float | None = None
    recall: float | None = None
    f_score: float | None = None


def _safe_div(num: float, den: float) -> float:
    return float(num / den) if den > 0 else 0.0


def metrics(cm: ConfusionMatrix, foreground: int | None = None) -> MetricsReport:
    """All reported scores from a confusion matrix.

    Per-class accuracies cover only classes present in the ground truth and
    their mean is the average accuracy. With a foreground class given, the
    matrix is collapsed to foreground-vs-rest for IoU/precision/recall/F.
    """
    counts = cm.counts.astype(np.float64)
    total = counts.sum()
    if total == 0:
        raise EmptyMatrix("confusion matrix is empty")
    row_sums = counts.sum(axis=1)
    diag = np.diag(counts)
    present = row_sums > 0
    per_class = {
        int(kk): float(diag[kk] / row_sums[kk]) for kk in np.nonzero(present)[0]
    }
    report = MetricsReport(
        global_accuracy=float(diag.sum() / total),
        per_class_accuracy=per_class,
        average_accuracy=float(np.mean(list(per_class.values()))),
        total_pixels=int(total),
    )
    if foreground is not None:
        f = foreground
        tp = counts[f, f]
        fp = counts[:, f].sum() - tp
        fn = counts[f, :].sum() - tp
        tn = total - tp - fp - fn
        report.foreground = f
        report.foreground_iou = _safe_div(tp, tp + fp + fn)
        report.background_iou = _safe_div(tn, tn + fp + fn)
        report.fg_bg_mean_iou = 0.5 * (report.foreground_iou + report.background_iou)
        report.precision = _safe_div(tp, tp + fp)
        report.recall = _safe_div(tp, tp + fn)
        pr = report.precision + report.recall
        report.f_score = _safe_div(2.0 * report.precision * report.recall, pr)
    return report


def render_text(report: MetricsReport, class_names: dict[int, str] | None = None) -> str:
    names = class_names or {}
    rows = [("class", "accuracy")]
    for cls in sorted(report.per_class_accuracy):
        rows.append((names.get(cls, str(cls)), f"{report.per_class_accuracy[cls]:.4f}"))
    rows.append(("Average", f"{report.average_accuracy:.4f}"))
    rows.append(("Global", f"{report.global_accuracy:.4f}"))
    if report.foreground is not None:
        rows.append(("Foreground IoU (S_o)", f"{report.foreground_iou:.4f}"))
        rows.append(("Background IoU", f"{report.background_iou:.4f}"))
        rows.append(("Fg/Bg mean IoU", f"{report.fg_bg_mean_iou:.4f}"))
        rows.append(("Precision", f"{report.precision:.4f}"))
        rows.append(("Recall", f"{report.recall:.4f}"))
        rows.append(("F-score", f"{report.f_score:.4f}"))
    width = max(len(r[0]) for r in rows)
    return "\n".join(f"{name.ljust(width)}  {value}" for name, value in rows) + "\n"


def render_csv(report: MetricsReport, class_names: dict[int, str] | None = None) -> str:
    names = class_names or {}
    out = ["row,metric,value"]
    for cls in sorted(report.per_class_accuracy):
        out.append(f"{names.get(cls, cls)},accuracy,{report.per_class_accuracy[cls]!r}")
    out.append(f"Average,accuracy,{report.average_accuracy!r}")
    out.append(f"Global,accuracy,{report.global_accuracy!r}")
    if report.foreground is not None:
        out.append(f"Foreground,iou,{report.foreground_iou!r}")
        out.append(f"Background,iou,{report.background_iou!r}")
        out.append(f"FgBgMean,iou,{report.fg_bg_mean_iou!r}")
        out.append(f"Foreground,precision,{report.precision!r}")
        out.append(f"Foreground,recall,{report.recall!r}")
        out.append(f"Foreground,f_score,{report.f_score!r}")
    return "\n".join(out) + "\n"
