import numpy as np
import pytest

from conftest import make_graph
from spcrf.errors import EmptyMatrix, LengthMismatch, MissingGroundTruth
from spcrf.evaluation import (
    VOID_LABEL,
    ConfusionMatrix,
    accumulate,
    metrics,
    render_csv,
    render_text,
)


def graph_with_areas(areas, truth):
    nodes = [(float(i), 0.0, a, []) for i, a in enumerate(areas)]
    return make_graph(nodes, [], feat_dim=0, pfeat_dim=0, num_classes=2, truth=truth)


# ---------------------------------------------------------------------------
# accumulation
# ---------------------------------------------------------------------------


def test_perfect_prediction_is_diagonal():
    g = graph_with_areas([10, 20, 30], [0, 1, 0])
    cm = accumulate(g, g.ground_truth, ConfusionMatrix.zeros(2))
    assert np.array_equal(cm.counts, [[40, 0], [0, 20]])


def test_single_node_off_diagonal():
    g = graph_with_areas([25], [0])
    cm = accumulate(g, np.array([1]), ConfusionMatrix.zeros(2))
    assert cm.counts[0, 1] == 25
    assert cm.total == 25


def test_three_node_hand_tally():
    g = graph_with_areas([5, 7, 11], [0, 1, 1])
    cm = accumulate(g, np.array([1, 1, 0]), ConfusionMatrix.zeros(2))
    assert np.array_equal(cm.counts, [[0, 5], [11, 7]])


def test_accumulate_requires_truth_and_lengths():
    g = graph_with_areas([5], [0])
    unlabeled = make_graph([(0, 0, 5, [])], [], 0, 0, 2)
    with pytest.raises(MissingGroundTruth):
        accumulate(unlabeled, np.array([0]), ConfusionMatrix.zeros(2))
    with pytest.raises(LengthMismatch):
        accumulate(g, np.array([0, 1]), ConfusionMatrix.zeros(2))


def test_void_label_ignored():
    nodes = [(0.0, 0.0, 5, []), (1.0, 0.0, 7, [])]
    g = make_graph(nodes, [], 0, 0, 2, truth=None)
    g = g.with_labels(np.array([0, 0]))
    g.ground_truth[1] = VOID_LABEL
    cm = accumulate(g, np.array([0, 1]), ConfusionMatrix.zeros(2))
    assert cm.total == 5


def test_accumulation_order_independent(rng):
    graphs = [
        graph_with_areas(rng.integers(1, 20, size=4), rng.integers(0, 2, size=4))
        for _ in range(6)
    ]
    preds = [rng.integers(0, 2, size=4) for _ in range(6)]
    cm1 = ConfusionMatrix.zeros(2)
    for g, p in zip(graphs, preds):
        accumulate(g, p, cm1)
    cm2 = ConfusionMatrix.zeros(2)
    for i in reversed(range(6)):
        accumulate(graphs[i], preds[i], cm2)
    assert np.array_equal(cm1.counts, cm2.counts)


# ---------------------------------------------------------------------------
# metrics
# ---------------------------------------------------------------------------


def test_perfect_metrics():
    cm = ConfusionMatrix(np.diag([70, 30]))
    report = metrics(cm, foreground=1)
    assert report.global_accuracy == 1.0
    assert report.foreground_iou == 1.0
    assert report.f_score == 1.0


def test_all_background_prediction():
    # 30% foreground ground truth, everything predicted background.
    cm = ConfusionMatrix(np.array([[70, 0], [30, 0]]))
    report = metrics(cm, foreground=1)
    assert report.global_accuracy == pytest.approx(0.7)
    assert report.foreground_iou == 0.0
    assert report.f_score == 0.0


def test_f_score_half_at_half_precision_recall():
    # TP=1, FP=1, FN=1 gives p = r = 0.5.
    cm = ConfusionMatrix(np.array([[10, 1], [1, 1]]))
    report = metrics(cm, foreground=1)
    assert report.precision == 0.5
    assert report.recall == 0.5
    assert report.f_score == 0.5


def test_absent_classes_excluded_from_average():
    cm = ConfusionMatrix(np.array([[8, 2, 0], [0, 0, 0], [1, 0, 3]]))
    report = metrics(cm)
    assert set(report.per_class_accuracy) == {0, 2}
    assert report.average_accuracy == pytest.approx((0.8 + 0.75) / 2)


def test_metric_ranges_and_iou_bound(rng):
    for _ in range(50):
        counts = rng.integers(0, 30, size=(3, 3))
        if counts.sum() == 0:
            continue
        report = metrics(ConfusionMatrix(counts), foreground=1)
        assert 0.0 <= report.global_accuracy <= 1.0
        assert 0.0 <= report.foreground_iou <= 1.0
        if 1 in report.per_class_accuracy:
            assert report.foreground_iou <= report.per_class_accuracy[1] + 1e-12


def test_permutation_invariance(rng):
    counts = rng.integers(0, 30, size=(3, 3))
    counts[0, 0] += 1
    perm = np.array([2, 0, 1])
    permuted = counts[np.ix_(perm, perm)]
    r1 = metrics(ConfusionMatrix(counts))
    r2 = metrics(ConfusionMatrix(permuted))
    assert r1.global_accuracy == pytest.approx(r2.global_accuracy)
    assert r1.average_accuracy == pytest.approx(r2.average_accuracy)


def test_empty_matrix_rejected():
    with pytest.raises(EmptyMatrix):
        metrics(ConfusionMatrix.zeros(2))


def test_reports_render():
    cm = ConfusionMatrix(np.array([[70, 10], [5, 15]]))
    report = metrics(cm, foreground=1)
    text = render_text(report)
    assert "Global" in text and "F-score" in text
    csv = render_csv(report)
    rows = [line.split(",") for line in csv.strip().splitlines()]
    assert rows[0] == ["row", "metric", "value"]
    values = {(r[0], r[1]): float(r[2]) for r in rows[1:]}
    assert values[("Global", "accuracy")] == pytest.approx(report.global_accuracy)
    assert values[("Foreground", "f_score")] == pytest.approx(report.f_score)
