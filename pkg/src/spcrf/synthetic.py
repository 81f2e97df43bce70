"""Synthetic desk-scale corpora: layered scene images with known per-pixel
classes, plus random graphs for solver stress tests."""

from __future__ import annotations

from pathlib import Path

import numpy as np
from PIL import Image

from .graph import Edge, Relation, SuperpixelGraph, SuperpixelNode

__all__ = ["PALETTE", "make_scene_image", "write_scene_corpus", "random_graph"]

# Well-separated base colors so mean-color features are informative.
PALETTE = np.array(
    [
        [52, 88, 204],
        [204, 72, 52],
        [72, 176, 84],
        [224, 196, 60],
        [150, 70, 190],
    ],
    dtype=np.float64,
)


def make_scene_image(
    size: int = 64,
    num_classes: int = 3,
    seed: int = 0,
    noise: float = 14.0,
) -> tuple[np.ndarray, np.ndarray]:
    """One layered scene: class 0 on top, class 1 below, and (for K >= 3) a
    class-2 blob inside the lower band. Returns (rgb uint8, truth uint8)."""
    rng = np.random.default_rng(seed)
    h = w = size
    truth = np.ones((h, w), dtype=np.uint8)
    horizon = int(h * rng.uniform(0.3, 0.6))
    wobble = np.round(
        rng.uniform(-0.08, 0.08) * h * np.sin(np.linspace(0, 3.1, w) + rng.uniform(0, 6))
    ).astype(int)
    for c in range(w):
        truth[: max(1, min(h - 1, horizon + wobble[c])), c] = 0
    if num_classes >= 3:
        cy = rng.uniform(0.65, 0.85) * h
        cx = rng.uniform(0.2, 0.8) * w
        radius = rng.uniform(0.1, 0.18) * h
        rows, cols = np.meshgrid(np.arange(h), np.arange(w), indexing="ij")
        blob = (rows - cy) ** 2 + (cols - cx) ** 2 < radius**2
        truth[blob & (truth == 1)] = 2
    rgb = PALETTE[truth] + rng.normal(0.0, noise, size=(h, w, 3))
    return np.clip(rgb, 0, 255).astype(np.uint8), truth


def write_scene_corpus(
    directory,
    count: int,
    size: int = 64,
    num_classes: int = 3,
    seed: int = 0,
) -> list[str]:
    """Write image_###.png plus image_###.truth.png pairs; returns stems."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    stems = []
    for i in range(count):
        rgb, truth = make_scene_image(size, num_classes, seed=seed + i)
        stem = f"image_{i:03d}"
        Image.fromarray(rgb).save(directory / f"{stem}.png")
        Image.fromarray(truth).save(directory / f"{stem}.truth.png")
        stems.append(stem)
    return stems


def random_graph(
    rng: np.random.Generator,
    num_nodes: int,
    num_classes: int,
    feat_dim: int = 2,
    pfeat_dim: int = 1,
    edge_prob: float = 0.6,
    with_truth: bool = False,
    positive_pairwise: bool = False,
) -> SuperpixelGraph:
    """Random connected-ish instance for solver tests."""
    nodes = [
        SuperpixelNode(
            id=i,
            centroid_row=float(rng.uniform(0, 50)),
            centroid_col=float(rng.uniform(0, 50)),
            area=int(rng.integers(1, 40)),
            features=rng.normal(0.0, 1.0, size=feat_dim),
        )
        for i in range(num_nodes)
    ]
    edges = []
    for p in range(num_nodes):
        for q in range(p + 1, num_nodes):
            linked = q == p + 1 or rng.uniform() < edge_prob
            if not linked:
                continue
            pf = rng.normal(0.0, 1.0, size=pfeat_dim)
            if positive_pairwise:
                pf = np.abs(pf) + 0.1
            edges.append(
                Edge(
                    p=p,
                    q=q,
                    relation=Relation(int(rng.integers(0, 4))),
                    boundary_length=float(rng.uniform(0.5, 3.0)),
                    pairwise_features=pf,
                )
            )
    truth = rng.integers(0, num_classes, size=num_nodes) if with_truth else None
    return SuperpixelGraph(
        nodes=nodes,
        edges=edges,
        feat_dim=feat_dim,
        pfeat_dim=pfeat_dim,
        num_classes=num_classes,
        ground_truth=truth,
    )
