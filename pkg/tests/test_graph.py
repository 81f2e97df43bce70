import numpy as np
import pytest

from spcrf.errors import (
    DanglingEdgeEndpoint,
    DimensionMismatch,
    DuplicateEdge,
    MalformedHeader,
    NonPositiveBoundaryLength,
)
from spcrf.graph import Relation, parse_graph_file, write_graph_file
from spcrf.synthetic import random_graph

MINIMAL = """SPGRAPH 1
nodes 1 feat_dim 2 classes 2
node 0 5 5 25 0.1 0.2
edges 0 pfeat_dim 0
"""


def test_parse_minimal_graph():
    g = parse_graph_file(MINIMAL)
    assert g.num_nodes == 1
    assert g.num_edges == 0
    assert g.feat_dim == 2
    assert g.num_classes == 2
    node = g.nodes[0]
    assert (node.centroid_row, node.centroid_col, node.area) == (5.0, 5.0, 25)
    assert np.array_equal(node.features, [0.1, 0.2])
    assert g.ground_truth is None


def test_parse_accepts_bytes_and_comments():
    text = "# a comment\n" + MINIMAL.replace("edges", "# another\nedges")
    g = parse_graph_file(text.encode("utf-8"))
    assert g.num_nodes == 1


def test_self_loop_rejected():
    with pytest.raises(DuplicateEdge):
        parse_graph_file(MINIMAL + "edge 0 0 0 1.0\n")
    text = """SPGRAPH 1
nodes 2 feat_dim 0 classes 2
node 0 0 0 1
node 1 1 1 1
edges 1 pfeat_dim 0
edge 0 0 0 1.0
"""
    with pytest.raises(DuplicateEdge) as err:
        parse_graph_file(text)
    assert "line 6" in str(err.value)


def test_duplicate_edge_rejected():
    text = """SPGRAPH 1
nodes 2 feat_dim 0 classes 2
node 0 0 0 1
node 1 1 1 1
edges 2 pfeat_dim 0
edge 0 1 0 1.0
edge 0 1 2 2.0
"""
    with pytest.raises(DuplicateEdge):
        parse_graph_file(text)


def test_unordered_endpoints_rejected():
    text = """SPGRAPH 1
nodes 2 feat_dim 0 classes 2
node 0 0 0 1
node 1 1 1 1
edges 1 pfeat_dim 0
edge 1 0 0 1.0
"""
    with pytest.raises(DuplicateEdge):
        parse_graph_file(text)


def test_dangling_endpoint_rejected():
    text = """SPGRAPH 1
nodes 2 feat_dim 0 classes 2
node 0 0 0 1
node 1 1 1 1
edges 1 pfeat_dim 0
edge 0 5 0 1.0
"""
    with pytest.raises(DanglingEdgeEndpoint) as err:
        parse_graph_file(text)
    assert "line 6" in str(err.value)


def test_nonpositive_boundary_rejected():
    text = """SPGRAPH 1
nodes 2 feat_dim 0 classes 2
node 0 0 0 1
node 1 1 1 1
edges 1 pfeat_dim 0
edge 0 1 0 0.0
"""
    with pytest.raises(NonPositiveBoundaryLength):
        parse_graph_file(text)


def test_feature_count_mismatch_rejected():
    with pytest.raises(MalformedHeader):
        parse_graph_file(MINIMAL.replace("0.1 0.2", "0.1"))


def test_bad_header_rejected():
    with pytest.raises(MalformedHeader) as err:
        parse_graph_file("SPGRAPH 2\n")
    assert "line 1" in str(err.value)


def test_sparse_node_ids_rejected():
    text = """SPGRAPH 1
nodes 2 feat_dim 0 classes 2
node 0 0 0 1
node 3 1 1 1
edges 0 pfeat_dim 0
"""
    with pytest.raises(MalformedHeader):
        parse_graph_file(text)


def test_relation_partition_on_three_node_file():
    text = """SPGRAPH 1
nodes 3 feat_dim 1 classes 2
node 0 0.0 0.0 4 1.5
node 1 0.0 3.0 5 -0.5
node 2 3.0 0.0 6 2.25
edges 2 pfeat_dim 1
edge 0 1 0 2.0 0.75
edge 1 2 2 3.5 1.25
"""
    g = parse_graph_file(text)
    groups = g.edges_by_relation()
    assert len(groups[Relation.ABOVE]) == 1
    assert len(groups[Relation.LEFT_OF]) == 1
    assert groups[Relation.BELOW] == []
    assert groups[Relation.RIGHT_OF] == []
    assert sum(len(v) for v in groups.values()) == g.num_edges
    e = g.edges[0]
    assert (e.p, e.q, e.boundary_length) == (0, 1, 2.0)
    assert np.array_equal(e.pairwise_features, [0.75])


def test_label_block_round_trip():
    text = MINIMAL + "label 0 1\n"
    g = parse_graph_file(text)
    assert np.array_equal(g.ground_truth, [1])
    written = write_graph_file(g)
    assert written.count("label") == 1
    assert parse_graph_file(written) == g


def test_partial_label_block_rejected():
    text = """SPGRAPH 1
nodes 2 feat_dim 0 classes 2
node 0 0 0 1
node 1 1 1 1
edges 0 pfeat_dim 0
label 0 1
"""
    with pytest.raises(MalformedHeader):
        parse_graph_file(text)


def test_label_out_of_range_rejected():
    with pytest.raises(DimensionMismatch):
        parse_graph_file(MINIMAL + "label 0 7\n")


def test_write_header_contract():
    g = parse_graph_file(MINIMAL)
    assert write_graph_file(g).startswith("SPGRAPH 1")


def test_round_trip_random_graphs(rng):
    for trial in range(25):
        g = random_graph(
            rng,
            num_nodes=20,
            num_classes=3,
            feat_dim=4,
            pfeat_dim=2,
            with_truth=bool(trial % 2),
        )
        assert parse_graph_file(write_graph_file(g)) == g


def test_write_parse_write_is_stable(rng):
    g = random_graph(rng, 12, 2, feat_dim=3, pfeat_dim=1)
    once = write_graph_file(g)
    assert write_graph_file(parse_graph_file(once)) == once


def test_opposite_is_involution():
    for rel in Relation:
        assert rel.opposite.opposite == rel
    assert Relation.ABOVE.opposite == Relation.BELOW
    assert Relation.LEFT_OF.opposite == Relation.RIGHT_OF
