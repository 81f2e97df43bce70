"""Learn CRF weights with the cutting-plane structured SVM and verify the
margin certificate on the training corpus."""

import numpy as np

from spcrf.features import UnaryFeatureMap
from spcrf.graph import Edge, Relation, SuperpixelGraph, SuperpixelNode
from spcrf.inference import Algorithm, InferenceConfig, LossSpec, map_inference
from spcrf.ssvm import SsvmConfig, train

rng = np.random.default_rng(0)
K = 3


def noisy_graph(n):
    labels = rng.integers(0, K, size=n)
    nodes = [
        SuperpixelNode(i, float(i), 0.0, 1, np.eye(K)[labels[i]] + rng.normal(0, 0.2, K))
        for i in range(n)
    ]
    edges = [
        Edge(i, i + 1, Relation(int(rng.integers(0, 4))), 1.0,
             np.array([float(rng.uniform(0, 1))]))
        for i in range(n - 1)
    ]
    return SuperpixelGraph(nodes, edges, K, 1, K, ground_truth=labels)


corpus = [noisy_graph(int(rng.integers(4, 8))) for _ in range(12)]
fmap = UnaryFeatureMap(num_classes=K, feat_dim=K)
loss = LossSpec.from_corpus(corpus)
print("loss weights:", np.round(loss.class_weights, 3))

cfg = SsvmConfig(c=50.0, inference=InferenceConfig(algorithm=Algorithm.EXHAUSTIVE))
weights, state = train(corpus, fmap, loss, cfg)
print(f"converged: {state.converged} after {state.iterations} iterations")
print("QP lower bound per iteration:", [round(v, 5) for v in state.qp_objectives])
print("final slack:", round(state.slack, 6))

errors = total = 0
for g in corpus:
    y, _ = map_inference(g, weights, fmap, InferenceConfig(algorithm=Algorithm.EXHAUSTIVE))
    errors += int((y != g.ground_truth).sum())
    total += g.num_nodes
print(f"training node error rate: {errors}/{total}")
