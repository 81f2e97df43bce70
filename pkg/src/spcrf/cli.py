"""Command-line pipelines: segment, featurize, count statistics, train,
predict, evaluate and tune the pairwise trade-off.

Exit codes: 0 success, 1 usage/validation error, 2 data error,
3 internal invariant breach. Every run writes a resolved-config file next
to its outputs so results are reproducible from the recorded flags alone.
"""

from __future__ import annotations

import argparse
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import energy as energy_mod
from .energy import (
    CoOccurrenceTable,
    PairwiseMode,
    WeightVector,
    build_cooccurrence,
    load_cooccurrence,
    save_cooccurrence,
)
from .errors import SpcrfError
from .evaluation import ConfusionMatrix, accumulate, metrics, render_csv, render_text
from .features import (
    ALL_CHANNELS,
    PairwiseChannel,
    PairwiseFeatureExtractor,
    PairwiseFeatureSpec,
    UnaryFeatureMap,
    UnaryMode,
    fit_standardization,
    train_linear_svm,
)
from .graph import SuperpixelGraph, load_graph, save_graph
from .inference import Algorithm, InferenceConfig, LossSpec, map_inference
from .model import SegmentationModel, load_model, save_model
from .ssvm import SsvmConfig, train, training_log_csv
from .superpixels import (
    LabelRaster,
    SlicConfig,
    read_image,
    read_raster,
    skeleton_from_raster,
    slic_segment,
    write_raster,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_INTERNAL = 3

IMAGE_SUFFIXES = {".png", ".ppm"}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse default exits with 2; we reserve 2 for data errors
        raise UsageError(message)


def _positive_float(text: str) -> float:
    value = float(text)
    if not value > 0 or not np.isfinite(value):
        raise argparse.ArgumentTypeError(f"{text} is not a positive finite number")
    return value


def _write_run_config(target: Path, subcommand: str, args: argparse.Namespace) -> None:
    lines = [f"subcommand={subcommand}"]
    for key in sorted(vars(args)):
        if key in ("func", "config"):
            continue
        lines.append(f"{key}={getattr(args, key)}")
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _load_config_defaults(argv: list[str]) -> dict[str, str]:
    """Pick up --config key=value files; explicit flags still win."""
    for i, tok in enumerate(argv):
        if tok == "--config" and i + 1 < len(argv):
            path = Path(argv[i + 1])
            if not path.exists():
                raise UsageError(f"config file {path} not found")
            out = {}
            for raw in path.read_text(encoding="utf-8").splitlines():
                line = raw.strip()
                if not line or line.startswith("#"):
                    continue
                if "=" not in line:
                    raise UsageError(f"config line without '=': {line!r}")
                key, value = line.split("=", 1)
                out[key.strip().replace("-", "_")] = value.strip()
            return out
    return {}


def _sorted_files(directory: Path, suffix: str) -> list[Path]:
    return sorted(p for p in directory.iterdir() if p.suffix == suffix or p.name.endswith(suffix))


def _load_graph_dir(directory: Path) -> list[tuple[str, SuperpixelGraph]]:
    files = _sorted_files(directory, ".spgraph")
    if not files:
        raise SpcrfError(f"no .spgraph files found in {directory}")
    return [(p.stem, load_graph(p)) for p in files]


# ---------------------------------------------------------------------------
# superpixels
# ---------------------------------------------------------------------------


def _segment_one(task):
    path_str, out_dir_str, target, compactness, iterations, classes, truth_str, resize = task
    path = Path(path_str)
    out_dir = Path(out_dir_str)
    image = read_image(path)
    if resize is not None:
        from PIL import Image

        w, h = resize
        image = np.asarray(Image.fromarray(image).resize((w, h), Image.BILINEAR))
    raster = slic_segment(image, SlicConfig(target, compactness, iterations))
    truth_mask = None
    if truth_str is not None:
        from PIL import Image

        with Image.open(truth_str) as im:
            truth_mask = np.asarray(im.convert("L"), dtype=np.int64)
        if resize is not None:
            with Image.open(truth_str) as im:
                truth_mask = np.asarray(
                    im.convert("L").resize(resize, Image.NEAREST), dtype=np.int64
                )
        truth_mask = np.minimum(truth_mask, classes - 1)
    graph = skeleton_from_raster(raster, num_classes=classes, truth_mask=truth_mask)
    save_graph(graph, out_dir / f"{path.stem}.spgraph")
    write_raster(raster, out_dir / f"{path.stem}.raster.png")
    return path.name


def cmd_superpixels(args) -> int:
    images_dir = Path(args.images)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    candidates = sorted(images_dir.iterdir()) if images_dir.is_dir() else []
    images, skipped = [], []
    for p in candidates:
        if p.suffix.lower() in IMAGE_SUFFIXES and not p.name.endswith(".truth.png"):
            images.append(p)
        elif p.is_file() and not p.name.endswith(".truth.png"):
            skipped.append(p)
    for p in skipped:
        print(f"warning: skipping non-image file {p.name}", file=sys.stderr)
    if not images:
        print("error: no images found", file=sys.stderr)
        return EXIT_DATA
    resize = None
    if args.resize:
        try:
            w, h = (int(v) for v in args.resize.lower().split("x"))
            resize = (w, h)
        except ValueError:
            raise UsageError(f"--resize expects WxH, got {args.resize!r}") from None
    tasks = []
    for p in images:
        truth = p.with_name(p.stem + ".truth.png")
        truth_path = None
        if args.truth_dir:
            cand = Path(args.truth_dir) / truth.name
            truth_path = str(cand) if cand.exists() else None
        elif truth.exists():
            truth_path = str(truth)
        tasks.append(
            (
                str(p),
                str(out_dir),
                args.target,
                args.compactness,
                args.iterations,
                args.classes,
                truth_path,
                resize,
            )
        )
    failures = []
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            for task, result in zip(tasks, pool.map(_segment_one_safe, tasks)):
                if result is not None:
                    failures.append((task[0], result))
    else:
        for task in tasks:
            result = _segment_one_safe(task)
            if result is not None:
                failures.append((task[0], result))
    _write_run_config(out_dir / "run-config.txt", "superpixels", args)
    if failures:
        for name, err in failures:
            print(f"error: {name}: {err}", file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK


def _segment_one_safe(task):
    try:
        _segment_one(task)
        return None
    except Exception as exc:  # reported per file; the command exits 2
        return str(exc)


# ---------------------------------------------------------------------------
# features
# ---------------------------------------------------------------------------


def _region_pixel_lists(raster: LabelRaster) -> list[np.ndarray]:
    flat = raster.assignments.ravel()
    order = np.argsort(flat, kind="stable")
    counts = np.bincount(flat, minlength=raster.num_superpixels)
    coords = np.stack(
        np.unravel_index(order, raster.assignments.shape), axis=1
    )
    out = []
    pos = 0
    for c in counts:
        out.append(coords[pos : pos + c])
        pos += c
    return out


def _node_features(image: np.ndarray, pixels: list[np.ndarray]) -> np.ndarray:
    """Mean and standard deviation of RGB per region: cheap stand-ins for
    externally supplied descriptors."""
    rows = []
    img = image.astype(np.float64) / 255.0
    for px in pixels:
        vals = img[px[:, 0], px[:, 1]]
        rows.append(np.concatenate([vals.mean(axis=0), vals.std(axis=0)]))
    return np.stack(rows)


def _featurize_one(task):
    stem, image_path, graph_path, raster_path, out_dir, channel_names = task
    image = read_image(image_path)
    graph = load_graph(graph_path)
    raster = read_raster(raster_path)
    spec = PairwiseFeatureSpec(
        channels=tuple(PairwiseChannel(name) for name in channel_names)
    )
    pixels = _region_pixel_lists(raster)
    if len(pixels) != graph.num_nodes:
        raise SpcrfError(f"{stem}: raster superpixels != graph nodes")
    feats = _node_features(image, pixels)
    extractor = PairwiseFeatureExtractor(image, spec)
    new_nodes = []
    for node, row in zip(graph.nodes, feats):
        new_nodes.append(
            type(node)(
                id=node.id,
                centroid_row=node.centroid_row,
                centroid_col=node.centroid_col,
                area=node.area,
                features=row,
            )
        )
    new_edges = []
    for e in graph.edges:
        pf = extractor.features(pixels[e.p], pixels[e.q], boundary_length=e.boundary_length)
        new_edges.append(
            type(e)(
                p=e.p,
                q=e.q,
                relation=e.relation,
                boundary_length=e.boundary_length,
                pairwise_features=pf,
            )
        )
    out = SuperpixelGraph(
        nodes=new_nodes,
        edges=new_edges,
        feat_dim=feats.shape[1],
        pfeat_dim=spec.dim,
        num_classes=graph.num_classes,
        ground_truth=graph.ground_truth,
    )
    save_graph(out, Path(out_dir) / f"{stem}.spgraph")
    return None


def _featurize_one_safe(task):
    try:
        return _featurize_one(task)
    except Exception as exc:
        return str(exc)


def cmd_features(args) -> int:
    graphs_dir = Path(args.graphs)
    images_dir = Path(args.images)
    rasters_dir = Path(args.rasters) if args.rasters else graphs_dir
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    channel_names = [c.strip() for c in args.channels.split(",") if c.strip()]
    valid = {c.value for c in ALL_CHANNELS}
    for name in channel_names:
        if name not in valid:
            raise UsageError(f"unknown pairwise channel {name!r} (choose from {sorted(valid)})")
    tasks = []
    for graph_path in _sorted_files(graphs_dir, ".spgraph"):
        stem = graph_path.stem
        image_path = None
        for suffix in (".png", ".ppm"):
            cand = images_dir / f"{stem}{suffix}"
            if cand.exists():
                image_path = cand
                break
        raster_path = rasters_dir / f"{stem}.raster.png"
        if image_path is None or not raster_path.exists():
            print(f"error: missing image or raster for {stem}", file=sys.stderr)
            return EXIT_DATA
        tasks.append(
            (stem, str(image_path), str(graph_path), str(raster_path), str(out_dir), channel_names)
        )
    if not tasks:
        print("error: no .spgraph files found", file=sys.stderr)
        return EXIT_DATA
    failures = []
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            for task, result in zip(tasks, pool.map(_featurize_one_safe, tasks)):
                if result is not None:
                    failures.append((task[0], result))
    else:
        for task in tasks:
            result = _featurize_one_safe(task)
            if result is not None:
                failures.append((task[0], result))
    _write_run_config(out_dir / "run-config.txt", "features", args)
    if failures:
        for name, err in failures:
            print(f"error: {name}: {err}", file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK


# ---------------------------------------------------------------------------
# stats / train / predict / eval / tune-alpha
# ---------------------------------------------------------------------------


def cmd_stats(args) -> int:
    graphs = [g for _, g in _load_graph_dir(Path(args.graphs))]
    table = build_cooccurrence(graphs)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    save_cooccurrence(table, out)
    _write_run_config(out.with_name(out.name + ".run-config.txt"), "stats", args)
    return EXIT_OK


def _resolve_loss(spec: str, graphs: list[SuperpixelGraph]) -> LossSpec:
    if spec == "auto":
        return LossSpec.from_corpus(graphs)
    if spec == "uniform":
        return LossSpec.uniform(graphs[0].num_classes)
    weights = np.array([float(v) for v in spec.split(",")])
    if len(weights) != graphs[0].num_classes:
        raise UsageError(
            f"--loss needs {graphs[0].num_classes} weights, got {len(weights)}"
        )
    return LossSpec(weights)


def _algorithm_from_flag(name: str) -> Algorithm:
    try:
        return Algorithm(name)
    except ValueError:
        raise UsageError(f"unknown algorithm {name!r}") from None


def cmd_train(args) -> int:
    named = _load_graph_dir(Path(args.graphs))
    graphs = [g for _, g in named]
    k = graphs[0].num_classes
    feat_dim = graphs[0].feat_dim
    mean, scale = fit_standardization(
        np.concatenate([g.feature_matrix() for g in graphs])
    )
    unary_mode = args.unary_mode
    if unary_mode == "auto":
        unary_mode = "svm" if k > 2 else "raw"
    svm = None
    if unary_mode == "svm":
        rows = np.concatenate([(g.feature_matrix() - mean) / scale for g in graphs])
        labels = np.concatenate([g.ground_truth for g in graphs])
        svm, _ = train_linear_svm(rows, labels, k, reg=args.svm_reg)
    fmap = UnaryFeatureMap(
        num_classes=k,
        feat_dim=feat_dim,
        mode=UnaryMode(unary_mode),
        svm=svm,
        mean=mean,
        scale=scale,
    )
    loss = _resolve_loss(args.loss, graphs)
    cfg = SsvmConfig(
        c=args.c,
        epsilon=args.epsilon,
        max_iterations=args.max_iterations,
        inference=InferenceConfig(algorithm=_algorithm_from_flag(args.algorithm)),
        seed=args.seed,
    )
    weights, state = train(graphs, fmap, loss, cfg)
    if not state.converged:
        print(
            f"warning: stopped after {state.iterations} iterations without "
            "satisfying the tolerance; writing best weights so far",
            file=sys.stderr,
        )
    model = SegmentationModel(
        num_classes=k,
        feat_dim=feat_dim,
        pfeat_dim=graphs[0].pfeat_dim,
        weights=weights,
        unary_mode=UnaryMode(unary_mode),
        svm=svm,
        mean=mean,
        scale=scale,
        relation_blocks=True,
        mode=PairwiseMode.PLAIN,
        alpha=1.0,
    )
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    save_model(model, out)
    log_path = out.with_name(out.name + ".log.csv")
    log_path.write_text(training_log_csv(state), encoding="utf-8")
    _write_run_config(out.with_name(out.name + ".run-config.txt"), "train", args)
    return EXIT_OK


def _predict_corpus(
    named: list[tuple[str, SuperpixelGraph]],
    model: SegmentationModel,
    mode: PairwiseMode,
    alpha: float,
    algorithm: Algorithm,
    table: CoOccurrenceTable | None,
    seed: int = 0,
) -> list[tuple[str, SuperpixelGraph, np.ndarray]]:
    fmap = model.unary_feature_map()
    cfg = InferenceConfig(algorithm=algorithm, mode=mode, alpha=alpha, seed=seed)
    out = []
    for stem, g in named:
        labels, _ = map_inference(
            g, model.weights, fmap, cfg, cooccur=table,
            relation_blocks=model.relation_blocks,
        )
        out.append((stem, g, labels))
    return out


def cmd_predict(args) -> int:
    mode = PairwiseMode(args.pairwise_mode)
    if mode != PairwiseMode.PLAIN and not args.cooccur:
        raise UsageError(f"--pairwise-mode {mode.value} requires --cooccur TABLE")
    table = load_cooccurrence(Path(args.cooccur)) if args.cooccur else None
    model = load_model(Path(args.model))
    named = _load_graph_dir(Path(args.graphs))
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    results = _predict_corpus(
        named, model, mode, args.alpha, _algorithm_from_flag(args.algorithm), table,
        seed=args.seed,
    )
    for stem, g, labels in results:
        save_graph(g.with_labels(labels), out_dir / f"{stem}.spgraph")
        if args.rasters:
            raster_path = Path(args.rasters) / f"{stem}.raster.png"
            if raster_path.exists():
                raster = read_raster(raster_path)
                class_map = labels[raster.assignments]
                write_raster(
                    LabelRaster(assignments=class_map.astype(np.int32)),
                    out_dir / f"{stem}.classes.png",
                )
    _write_run_config(out_dir / "run-config.txt", "predict", args)
    return EXIT_OK


def cmd_eval(args) -> int:
    pred = dict(_load_graph_dir(Path(args.predictions)))
    truth = dict(_load_graph_dir(Path(args.truth)))
    shared = sorted(set(pred) & set(truth))
    if not shared:
        raise SpcrfError("no matching graph files between predictions and truth")
    cm = ConfusionMatrix.zeros(next(iter(truth.values())).num_classes)
    for stem in shared:
        pred_graph = pred[stem]
        if pred_graph.ground_truth is None:
            raise SpcrfError(f"{stem}: prediction file has no label block")
        accumulate(truth[stem], pred_graph.ground_truth, cm)
    report = metrics(cm, foreground=args.foreground)
    text = render_text(report)
    sys.stdout.write(text)
    if args.out:
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / "metrics.txt").write_text(text, encoding="utf-8")
        (out_dir / "metrics.csv").write_text(render_csv(report), encoding="utf-8")
        _write_run_config(out_dir / "run-config.txt", "eval", args)
    return EXIT_OK


def cmd_tune_alpha(args) -> int:
    mode = PairwiseMode(args.pairwise_mode)
    if mode != PairwiseMode.PLAIN and not args.cooccur:
        raise UsageError(f"--pairwise-mode {mode.value} requires --cooccur TABLE")
    table = load_cooccurrence(Path(args.cooccur)) if args.cooccur else None
    try:
        grid = [float(v) for v in args.grid.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"bad --grid {args.grid!r}") from None
    if not grid or any(not (v > 0 and np.isfinite(v)) for v in grid):
        raise UsageError("--grid needs positive finite values")
    model = load_model(Path(args.model))
    named = _load_graph_dir(Path(args.graphs))
    for _, g in named:
        if g.ground_truth is None:
            raise SpcrfError("tune-alpha needs ground-truth labels on every graph")
    algorithm = _algorithm_from_flag(args.algorithm)
    best_alpha, best_sa = None, -1.0
    rows = ["alpha,global_accuracy"]
    for alpha in grid:
        cm = ConfusionMatrix.zeros(model.num_classes)
        for stem, g, labels in _predict_corpus(named, model, mode, alpha, algorithm, table):
            accumulate(g, labels, cm)
        sa = metrics(cm).global_accuracy
        rows.append(f"{alpha!r},{sa!r}")
        if sa > best_sa:
            best_alpha, best_sa = alpha, sa
    print(f"best_alpha {best_alpha!r} global_accuracy {best_sa!r}")
    if args.out:
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / "alpha-grid.csv").write_text("\n".join(rows) + "\n", encoding="utf-8")
        (out_dir / "best-alpha.txt").write_text(f"{best_alpha!r}\n", encoding="utf-8")
        _write_run_config(out_dir / "run-config.txt", "tune-alpha", args)
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser wiring
# ---------------------------------------------------------------------------


REQUIRED = {
    "superpixels": ["images", "out"],
    "features": ["images", "graphs", "out"],
    "stats": ["graphs", "out"],
    "train": ["graphs", "out"],
    "predict": ["graphs", "model", "out"],
    "eval": ["predictions", "truth"],
    "tune-alpha": ["graphs", "model"],
}


def build_parser(argument_default=None) -> _Parser:
    parser = _Parser(prog="spcrf", description=__doc__)
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def new_command(name, func, help_text):
        p = sub.add_parser(name, help=help_text, argument_default=argument_default)
        if argument_default is argparse.SUPPRESS:
            # Per-argument defaults would defeat explicit-flag detection.
            real_add = p.add_argument

            def add_argument(*a, **kw):
                kw.pop("default", None)
                return real_add(*a, **kw)

            p.add_argument = add_argument  # type: ignore[method-assign]
        p.add_argument("--config", help="key=value file with flag defaults")
        p.add_argument("--seed", type=int, default=0)
        p.set_defaults(func=func)
        return p

    p = new_command("superpixels", cmd_superpixels, "segment images into superpixel graphs")
    p.add_argument("--images")
    p.add_argument("--out")
    p.add_argument("--target", type=int, default=700)
    p.add_argument("--compactness", type=_positive_float, default=10.0)
    p.add_argument("--iterations", type=int, default=10)
    p.add_argument("--classes", type=int, default=2)
    p.add_argument("--truth-dir", dest="truth_dir")
    p.add_argument("--resize", help="WxH")
    p.add_argument("--jobs", type=int, default=1)

    p = new_command("features", cmd_features, "fill node and edge feature slots from images")
    p.add_argument("--images")
    p.add_argument("--graphs")
    p.add_argument("--rasters")
    p.add_argument("--out")
    p.add_argument("--channels", default=",".join(c.value for c in ALL_CHANNELS))
    p.add_argument("--jobs", type=int, default=1)

    p = new_command("stats", cmd_stats, "build the co-occurrence table from labelled graphs")
    p.add_argument("--graphs")
    p.add_argument("--out")

    p = new_command("train", cmd_train, "learn CRF weights with the cutting-plane SSVM")
    p.add_argument("--graphs")
    p.add_argument("--out")
    p.add_argument("--c", type=_positive_float, default=100.0)
    p.add_argument("--epsilon", type=_positive_float, default=1e-3)
    p.add_argument("--loss", default="auto", help="auto | uniform | comma list")
    p.add_argument("--max-iterations", dest="max_iterations", type=int, default=200)
    p.add_argument("--unary-mode", dest="unary_mode", choices=["auto", "raw", "svm"],
                   default="auto")
    p.add_argument("--svm-reg", dest="svm_reg", type=_positive_float, default=1e-3)
    p.add_argument("--algorithm", default="expansion", choices=[a.value for a in Algorithm])

    p = new_command("predict", cmd_predict, "MAP-label graphs with a trained model")
    p.add_argument("--graphs")
    p.add_argument("--model")
    p.add_argument("--out")
    p.add_argument("--pairwise-mode", dest="pairwise_mode",
                   choices=[m.value for m in PairwiseMode], default="plain")
    p.add_argument("--cooccur")
    p.add_argument("--alpha", type=_positive_float, default=1.0)
    p.add_argument("--algorithm", default="expansion", choices=[a.value for a in Algorithm])
    p.add_argument("--rasters", help="emit per-pixel class rasters too")

    p = new_command("eval", cmd_eval, "score predictions against ground truth")
    p.add_argument("--predictions")
    p.add_argument("--truth")
    p.add_argument("--foreground", type=int)
    p.add_argument("--out")

    p = new_command("tune-alpha", cmd_tune_alpha, "pick the pairwise trade-off on validation data")
    p.add_argument("--graphs")
    p.add_argument("--model")
    p.add_argument("--grid", default="0.5,1.0,1.5,2.0")
    p.add_argument("--pairwise-mode", dest="pairwise_mode",
                   choices=[m.value for m in PairwiseMode], default="cooccur")
    p.add_argument("--cooccur")
    p.add_argument("--algorithm", default="expansion", choices=[a.value for a in Algorithm])
    p.add_argument("--out")

    return parser


def _coerce_like(current, value: str):
    if isinstance(current, bool):
        return value.lower() in ("1", "true", "yes")
    if isinstance(current, int):
        return int(value)
    if isinstance(current, float):
        return float(value)
    if current is None:
        for cast in (int, float):
            try:
                return cast(value)
            except ValueError:
                pass
    return value


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        config = _load_config_defaults(argv)
        # Full parse fills defaults; a second parse with suppressed defaults
        # reveals which flags were explicit, so config values can be layered
        # in between (defaults < config < explicit flags).
        merged = vars(build_parser().parse_args(argv))
        explicit = vars(build_parser(argparse.SUPPRESS).parse_args(argv))
        for key, value in config.items():
            if key in merged and key not in ("func", "subcommand"):
                merged[key] = _coerce_like(merged[key], value)
        merged.update(explicit)
        args = argparse.Namespace(**merged)
        missing = [
            name for name in REQUIRED.get(args.subcommand, [])
            if getattr(args, name, None) is None
        ]
        if missing:
            raise UsageError(
                "missing required flags: " + ", ".join(f"--{m}" for m in missing)
            )
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (SpcrfError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except AssertionError as exc:  # invariant breach
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
