"""Compare the three MAP solvers on one random labeling problem."""

import numpy as np

from spcrf.energy import WeightVector
from spcrf.features import UnaryFeatureMap
from spcrf.inference import Algorithm, InferenceConfig, map_inference
from spcrf.synthetic import random_graph

rng = np.random.default_rng(3)
graph = random_graph(rng, num_nodes=9, num_classes=3, feat_dim=4, pfeat_dim=2)
fmap = UnaryFeatureMap(num_classes=3, feat_dim=4)
weights = WeightVector(rng.normal(size=fmap.unary_dim), rng.normal(size=8))

print(f"{graph.num_nodes} nodes, {graph.num_edges} edges, 3 labels -> "
      f"{3 ** graph.num_nodes} labelings")
for algorithm in Algorithm:
    labels, value = map_inference(
        graph, weights, fmap, InferenceConfig(algorithm=algorithm, seed=1)
    )
    print(f"{algorithm.value:>11}: energy {value:+.6f}  labels {labels.tolist()}")

# The exhaustive solver is the oracle; the move-making solvers are local but
# land on the optimum for most small instances.
