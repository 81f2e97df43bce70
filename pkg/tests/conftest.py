import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from spcrf.energy import CoOccurrenceTable
from spcrf.graph import Edge, Relation, SuperpixelGraph, SuperpixelNode


def make_graph(node_specs, edge_specs, feat_dim, pfeat_dim, num_classes, truth=None):
    """Compact fixture builder.

    node_specs: list of (row, col, area, features); edge_specs: list of
    (p, q, relation, length, pairwise_features).
    """
    nodes = [
        SuperpixelNode(
            id=i,
            centroid_row=float(r),
            centroid_col=float(c),
            area=int(a),
            features=np.asarray(f, dtype=np.float64),
        )
        for i, (r, c, a, f) in enumerate(node_specs)
    ]
    edges = [
        Edge(
            p=p,
            q=q,
            relation=Relation(rel),
            boundary_length=float(length),
            pairwise_features=np.asarray(pf, dtype=np.float64),
        )
        for p, q, rel, length, pf in edge_specs
    ]
    return SuperpixelGraph(
        nodes=nodes,
        edges=edges,
        feat_dim=feat_dim,
        pfeat_dim=pfeat_dim,
        num_classes=num_classes,
        ground_truth=None if truth is None else np.asarray(truth, dtype=np.int64),
    )


def random_count_table(rng, num_classes, max_images=4) -> CoOccurrenceTable:
    """Random but invariant-satisfying co-occurrence counts."""
    k = num_classes
    coexist = np.zeros((k, k), dtype=np.int64)
    rel = np.zeros((4, k, k), dtype=np.int64)
    for a in range(k):
        for b in range(a + 1, k):
            n = int(rng.integers(0, max_images + 1))
            coexist[a, b] = coexist[b, a] = n
            for i in range(4):
                rel[i, a, b] = int(rng.integers(0, n + 1))
    # Opposite-transpose symmetry: counts for (b, a) mirror (a, b).
    for i in range(4):
        opp = i ^ 1
        for a in range(k):
            for b in range(a + 1, k):
                rel[opp, b, a] = rel[i, a, b]
    table = CoOccurrenceTable(num_classes=k, coexist=coexist, relation_counts=rel)
    table.validate()
    return table


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def two_node_image(labels, relation, num_classes=3):
    return make_graph(
        [(0, 0, 1, []), (1, 1, 1, [])],
        [(0, 1, relation, 1.0, [1.0])],
        feat_dim=0,
        pfeat_dim=1,
        num_classes=num_classes,
        truth=labels,
    )


def hand_fixture_corpus():
    """Four tiny labelled images with hand-countable co-occurrence stats."""
    img1 = two_node_image([0, 1], Relation.ABOVE)
    img2 = two_node_image([0, 1], Relation.LEFT_OF)
    img3 = make_graph(
        [(0, 0, 1, []), (5, 0, 1, []), (5, 5, 1, [])],
        [(0, 1, Relation.ABOVE, 1.0, [1.0]), (0, 2, Relation.ABOVE, 1.0, [1.0])],
        feat_dim=0,
        pfeat_dim=1,
        num_classes=3,
        truth=[0, 1, 2],
    )
    img4 = two_node_image([0, 1], Relation.BELOW)
    return [img1, img2, img3, img4]


# Hand counts for the fixture: N then (Above, Below, LeftOf, RightOf).
HAND_COUNTS = {
    (0, 1): (4, (2, 1, 1, 0)),
    (1, 0): (4, (1, 2, 0, 1)),
    (0, 2): (1, (1, 0, 0, 0)),
    (2, 0): (1, (0, 1, 0, 0)),
    (1, 2): (1, (0, 0, 0, 0)),
    (2, 1): (1, (0, 0, 0, 0)),
}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    """One visible pass/fail line per acceptance criterion."""
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call" and item.fspath.basename == "test_acceptance.py":
        name = item.name.removeprefix("test_")
        status = "PASS" if rep.passed else "FAIL"
        reporter = item.config.pluginmanager.get_plugin("terminalreporter")
        if reporter is not None:
            reporter.write_line(f"[acceptance] {name}: {status}")
