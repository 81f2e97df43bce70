"""spcrf: superpixel CRF segmentation toolkit.

Max-margin learning of CRF potentials over superpixel graphs and MAP
inference with spatially related co-occurrence pairwise potentials.
"""

from .energy import (
    CoOccurrenceTable,
    PairwiseMode,
    WeightVector,
    build_cooccurrence,
    energy,
    joint_feature_map,
    load_cooccurrence,
    save_cooccurrence,
)
from .errors import SpcrfError
from .evaluation import ConfusionMatrix, accumulate, metrics
from .features import (
    LinearSvmModel,
    PairwiseChannel,
    PairwiseFeatureExtractor,
    PairwiseFeatureSpec,
    UnaryFeatureMap,
    UnaryMode,
    pairwise_features,
    train_linear_svm,
    unary_map,
)
from .graph import (
    Edge,
    Relation,
    SuperpixelGraph,
    SuperpixelNode,
    load_graph,
    parse_graph_file,
    save_graph,
    write_graph_file,
)
from .inference import (
    Algorithm,
    InferenceConfig,
    LossSpec,
    loss_augmented_inference,
    map_inference,
    weighted_hamming,
)
from .model import SegmentationModel, load_model, save_model
from .ssvm import SsvmConfig, TrainingState, qp_solve, train
from .superpixels import (
    LabelRaster,
    SlicConfig,
    build_adjacency,
    read_image,
    read_raster,
    skeleton_from_raster,
    slic_segment,
    tag_relation,
    write_raster,
)

__version__ = "0.1.0"
