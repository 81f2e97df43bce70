"""Unary feature mapping and pairwise smoothness features.

The unary map places a per-node payload (raw features or one-vs-all SVM
confidence scores) into the block selected by the node's label, so that the
energy is linear in the stacked weight vector. Pairwise features are
scalar dissimilarity channels between two superpixel regions.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np
from skimage.color import rgb2gray, rgb2luv
from skimage.feature import local_binary_pattern

from .errors import DimensionMismatch, SingleClassCorpus

__all__ = [
    "LinearSvmModel",
    "train_linear_svm",
    "UnaryMode",
    "UnaryFeatureMap",
    "unary_map",
    "fit_standardization",
    "PairwiseChannel",
    "PairwiseFeatureSpec",
    "PairwiseFeatureExtractor",
    "pairwise_features",
]


# ---------------------------------------------------------------------------
# One-vs-all linear SVM (confidence-score compression of high-dim features)
# ---------------------------------------------------------------------------


@dataclass
class LinearSvmModel:
    weights: np.ndarray  # (K, d)
    biases: np.ndarray  # (K,)

    @property
    def num_classes(self) -> int:
        return self.weights.shape[0]

    @property
    def feat_dim(self) -> int:
        return self.weights.shape[1]

    def scores(self, features: np.ndarray) -> np.ndarray:
        """Signed margins of the K one-vs-all classifiers."""
        features = np.asarray(features, dtype=np.float64)
        return features @ self.weights.T + self.biases

    def predict(self, features: np.ndarray) -> np.ndarray:
        return self.scores(features).argmax(axis=-1)


def _svm_objective(w, b, x, t, reg):
    margins = t * (x @ w.T + b)
    hinge = np.maximum(0.0, 1.0 - margins).mean(axis=0).sum()
    return 0.5 * reg * float((w * w).sum()) + float(hinge)


def train_linear_svm(
    features: np.ndarray,
    labels: np.ndarray,
    num_classes: int,
    reg: float = 1e-3,
    max_epochs: int = 300,
    tol: float = 1e-9,
) -> tuple[LinearSvmModel, list[float]]:
    """Train K one-vs-all hinge-loss classifiers by batch subgradient descent.

    Steps are accepted only if they decrease the joint objective (backtracking
    halves the step otherwise), so the returned per-epoch objective history is
    non-increasing. Fully deterministic.
    """
    x = np.asarray(features, dtype=np.float64)
    y = np.asarray(labels, dtype=np.int64)
    if x.ndim != 2 or len(x) != len(y):
        raise DimensionMismatch("features must be (n, d) matching labels")
    if len(np.unique(y)) < 2:
        raise SingleClassCorpus("need examples from at least 2 classes")
    if not reg > 0:
        raise ValueError("reg must be positive")

    n, d = x.shape
    t = np.full((n, num_classes), -1.0)
    t[np.arange(n), y] = 1.0

    w = np.zeros((num_classes, d))
    b = np.zeros(num_classes)
    obj = _svm_objective(w, b, x, t, reg)
    history = [obj]
    step = 1.0
    for _ in range(max_epochs):
        margins = t * (x @ w.T + b)
        viol = (margins < 1.0).astype(np.float64) * t  # (n, K)
        grad_w = reg * w - (viol.T @ x) / n
        grad_b = -viol.mean(axis=0)
        accepted = False
        for _ in range(60):
            w_new = w - step * grad_w
            b_new = b - step * grad_b
            obj_new = _svm_objective(w_new, b_new, x, t, reg)
            if obj_new <= obj:
                accepted = True
                break
            step *= 0.5
        if not accepted:
            break
        improvement = obj - obj_new
        w, b, obj = w_new, b_new, obj_new
        history.append(obj)
        step *= 1.3
        if improvement < tol * max(1.0, abs(obj)):
            break
    return LinearSvmModel(weights=w, biases=b), history


# ---------------------------------------------------------------------------
# Unary feature map
# ---------------------------------------------------------------------------


class UnaryMode(enum.Enum):
    RAW_INDICATOR = "raw"
    SVM_CONFIDENCE = "svm"


@dataclass
class UnaryFeatureMap:
    """Configuration of the block-indicator unary feature mapping.

    The per-node payload is either the (optionally standardized) raw feature
    vector, or the K SVM confidence scores computed from it; the mapping of a
    labelled node is the payload placed in the label's block, zeros elsewhere.
    """

    num_classes: int
    feat_dim: int
    mode: UnaryMode = UnaryMode.RAW_INDICATOR
    svm: LinearSvmModel | None = None
    mean: np.ndarray | None = None
    scale: np.ndarray | None = None

    def __post_init__(self):
        if self.mode == UnaryMode.SVM_CONFIDENCE:
            if self.svm is None:
                raise ValueError("SVM_CONFIDENCE mode needs a LinearSvmModel")
            if self.svm.num_classes != self.num_classes:
                raise DimensionMismatch("SVM class count differs from map")
            if self.svm.feat_dim != self.feat_dim:
                raise DimensionMismatch("SVM feature dim differs from map")

    @property
    def block_dim(self) -> int:
        if self.mode == UnaryMode.SVM_CONFIDENCE:
            return self.num_classes
        return self.feat_dim

    @property
    def unary_dim(self) -> int:
        return self.num_classes * self.block_dim

    def standardize(self, features: np.ndarray) -> np.ndarray:
        features = np.asarray(features, dtype=np.float64)
        if self.mean is not None:
            features = features - self.mean
        if self.scale is not None:
            features = features / self.scale
        return features

    def payload(self, features: np.ndarray) -> np.ndarray:
        """Per-node payload vector (works on single vectors or (n, d) rows)."""
        features = np.asarray(features, dtype=np.float64)
        if features.shape[-1] != self.feat_dim:
            raise DimensionMismatch(
                f"feature length {features.shape[-1]} != feat_dim {self.feat_dim}"
            )
        z = self.standardize(features)
        if self.mode == UnaryMode.SVM_CONFIDENCE:
            return self.svm.scores(z)
        return z


def unary_map(features: np.ndarray, label: int, fmap: UnaryFeatureMap) -> np.ndarray:
    """Block-indicator unary feature vector of one labelled node."""
    if not (0 <= label < fmap.num_classes):
        raise DimensionMismatch(f"label {label} outside 0..{fmap.num_classes - 1}")
    payload = fmap.payload(features)
    out = np.zeros(fmap.unary_dim)
    bd = fmap.block_dim
    out[label * bd : (label + 1) * bd] = payload
    return out


def fit_standardization(feature_rows: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Corpus mean and scale (std, with zero-variance dims kept at 1)."""
    x = np.asarray(feature_rows, dtype=np.float64)
    mean = x.mean(axis=0)
    scale = x.std(axis=0)
    scale[scale == 0] = 1.0
    return mean, scale


# ---------------------------------------------------------------------------
# Pairwise features
# ---------------------------------------------------------------------------


class PairwiseChannel(enum.Enum):
    BOUNDARY_LENGTH = "boundary_length"
    LUV_COLOR_DIFF = "luv_diff"
    COLOR_HIST_DIFF = "hist_diff"
    LBP_DIFF = "lbp_diff"


ALL_CHANNELS = (
    PairwiseChannel.BOUNDARY_LENGTH,
    PairwiseChannel.LUV_COLOR_DIFF,
    PairwiseChannel.COLOR_HIST_DIFF,
    PairwiseChannel.LBP_DIFF,
)


@dataclass
class PairwiseFeatureSpec:
    channels: tuple[PairwiseChannel, ...] = ALL_CHANNELS
    hist_bins: int = 8
    lbp_radius: int = 1

    def __post_init__(self):
        if not self.channels:
            raise ValueError("at least one pairwise channel must be enabled")

    @property
    def dim(self) -> int:
        return len(self.channels)

    def channel_names(self) -> list[str]:
        return [c.value for c in self.channels]


def _chi2(h1: np.ndarray, h2: np.ndarray) -> float:
    denom = h1 + h2
    mask = denom > 0
    diff = h1 - h2
    return float(0.5 * ((diff[mask] ** 2) / denom[mask]).sum())


def _boundary_length(p_pixels: np.ndarray, q_pixels: np.ndarray) -> float:
    p_set = set(map(tuple, np.asarray(p_pixels).tolist()))
    count = 0
    for r, c in np.asarray(q_pixels).tolist():
        for rr, cc in ((r - 1, c), (r + 1, c), (r, c - 1), (r, c + 1)):
            if (rr, cc) in p_set:
                count += 1
    return float(count)


class PairwiseFeatureExtractor:
    """Per-image cache for pairwise features over many region pairs."""

    def __init__(self, image: np.ndarray, spec: PairwiseFeatureSpec | None = None):
        self.spec = spec or PairwiseFeatureSpec()
        self.image = np.asarray(image)
        channels = set(self.spec.channels)
        self._luv = None
        self._lbp = None
        if PairwiseChannel.LUV_COLOR_DIFF in channels:
            self._luv = rgb2luv(self.image.astype(np.float64) / 255.0)
        if PairwiseChannel.LBP_DIFF in channels:
            gray = np.round(rgb2gray(self.image) * 255.0).astype(np.uint8)
            self._lbp = local_binary_pattern(
                gray, 8, self.spec.lbp_radius, method="nri_uniform"
            ).astype(np.int64)

    def _color_hist(self, pixels: np.ndarray) -> np.ndarray:
        rr, cc = pixels[:, 0], pixels[:, 1]
        vals = self.image[rr, cc].astype(np.int64)
        bins = self.spec.hist_bins
        hists = [
            np.bincount(np.minimum(vals[:, ch] * bins // 256, bins - 1), minlength=bins)
            for ch in range(3)
        ]
        h = np.concatenate(hists).astype(np.float64)
        return h / len(pixels)

    def _lbp_hist(self, pixels: np.ndarray) -> np.ndarray:
        codes = self._lbp[pixels[:, 0], pixels[:, 1]]
        h = np.bincount(codes, minlength=59).astype(np.float64)
        return h / len(pixels)

    def features(
        self,
        p_pixels: np.ndarray,
        q_pixels: np.ndarray,
        boundary_length: float | None = None,
    ) -> np.ndarray:
        """Channel values in spec order; symmetric in (p, q) exactly."""
        p_pixels = np.asarray(p_pixels)
        q_pixels = np.asarray(q_pixels)
        out = []
        for channel in self.spec.channels:
            if channel == PairwiseChannel.BOUNDARY_LENGTH:
                if boundary_length is None:
                    boundary_length = _boundary_length(p_pixels, q_pixels)
                out.append(float(boundary_length))
            elif channel == PairwiseChannel.LUV_COLOR_DIFF:
                mp = self._luv[p_pixels[:, 0], p_pixels[:, 1]].mean(axis=0)
                mq = self._luv[q_pixels[:, 0], q_pixels[:, 1]].mean(axis=0)
                out.append(float(np.sqrt(((mp - mq) ** 2).sum())))
            elif channel == PairwiseChannel.COLOR_HIST_DIFF:
                out.append(_chi2(self._color_hist(p_pixels), self._color_hist(q_pixels)))
            elif channel == PairwiseChannel.LBP_DIFF:
                out.append(_chi2(self._lbp_hist(p_pixels), self._lbp_hist(q_pixels)))
        return np.array(out)


def pairwise_features(
    p_pixels: np.ndarray,
    q_pixels: np.ndarray,
    image: np.ndarray,
    spec: PairwiseFeatureSpec | None = None,
    boundary_length: float | None = None,
) -> np.ndarray:
    """One-shot pairwise feature vector between two pixel regions."""
    return PairwiseFeatureExtractor(image, spec).features(
        p_pixels, q_pixels, boundary_length
    )
