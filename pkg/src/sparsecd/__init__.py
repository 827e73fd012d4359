"""Community detection in sparse, degree-heterogeneous graphs with
parametrised Bethe-Hessian embeddings."""

__version__ = "0.1.0"

from .baselines import ALL_METHODS, cluster_with
from .clustering import ClusteringResult, build_embedding, detect_communities, kmeans, normalize_rows
from .estimation import EstimationError, KEstimate, ZetaResult, compute_zeta, estimate_k, zeta_from_B
from .generators import (
    DcSbmParams,
    LabeledGraph,
    ThetaSpec,
    detectability,
    planted_partition,
    random_affinity,
    sample_dcsbm,
    two_class_symmetric,
)
from .graph import (
    GraphError,
    SparseGraph,
    connected_components,
    from_edge_list,
    graph_stats,
    largest_component,
    read_edge_list,
    write_edge_list,
)
from .scoring import ScoreBundle, dcsbm_log_likelihood, modularity, overlap, score_partition
from .spectral import ConvergenceError, bethe_hessian, spectral_radius_B

__all__ = [
    "ALL_METHODS",
    "ClusteringResult",
    "ConvergenceError",
    "DcSbmParams",
    "EstimationError",
    "GraphError",
    "KEstimate",
    "LabeledGraph",
    "ScoreBundle",
    "SparseGraph",
    "ThetaSpec",
    "ZetaResult",
    "bethe_hessian",
    "build_embedding",
    "cluster_with",
    "compute_zeta",
    "connected_components",
    "dcsbm_log_likelihood",
    "detect_communities",
    "detectability",
    "estimate_k",
    "from_edge_list",
    "graph_stats",
    "kmeans",
    "largest_component",
    "modularity",
    "normalize_rows",
    "overlap",
    "planted_partition",
    "random_affinity",
    "read_edge_list",
    "sample_dcsbm",
    "score_partition",
    "spectral_radius_B",
    "two_class_symmetric",
    "write_edge_list",
    "zeta_from_B",
]
