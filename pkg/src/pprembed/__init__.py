"""Globally consistent single-node graph embeddings in sublinear time.

The pipeline pushes an epsilon-approximate personalized PageRank vector for
one source node, log-scales the masses against the uniform level and hashes
them into a fixed number of signed buckets. Embedding one node never loads
the full graph, yet equals the corresponding row of the whole-graph
computation bit for bit.
"""

from .embedder import (
    DEFAULT_DIM,
    EmbedConfig,
    EmbeddingMatrix,
    EmbeddingVector,
    embed_graph,
    embed_node,
    embed_node_with_stats,
    read_embeddings_binary,
    read_embeddings_text,
    transform_mass,
    write_embeddings_binary,
    write_embeddings_text,
)
from .evaluation import (
    STRATEGIES,
    EdgeSplit,
    LabelSet,
    LogRegModel,
    classify_topk,
    edge_feature,
    f1_scores,
    load_labels,
    roc_auc,
    run_classification,
    run_link_prediction,
    split_edges,
    train_logreg,
    train_one_vs_rest,
)
from .generators import erdos_renyi_edges, two_block_sbm
from .graphio import (
    BinaryFormatError,
    EdgeListError,
    Graph,
    GraphHandle,
    load_edge_list,
    open_binary,
    read_binary,
    write_binary,
)
from .hashing import HashSeeds, hash_dim, hash_sign, mix64, project
from .ppr import (
    DEFAULT_ALPHA,
    DEFAULT_EPSILON,
    PushStats,
    SparsePprVector,
    approximate_ppr,
    exact_ppr,
)

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_ALPHA",
    "DEFAULT_DIM",
    "DEFAULT_EPSILON",
    "BinaryFormatError",
    "EdgeListError",
    "EdgeSplit",
    "EmbedConfig",
    "EmbeddingMatrix",
    "EmbeddingVector",
    "Graph",
    "GraphHandle",
    "HashSeeds",
    "LabelSet",
    "LogRegModel",
    "PushStats",
    "STRATEGIES",
    "SparsePprVector",
    "approximate_ppr",
    "classify_topk",
    "edge_feature",
    "embed_graph",
    "embed_node",
    "embed_node_with_stats",
    "erdos_renyi_edges",
    "exact_ppr",
    "f1_scores",
    "hash_dim",
    "hash_sign",
    "load_edge_list",
    "load_labels",
    "mix64",
    "open_binary",
    "project",
    "read_binary",
    "read_embeddings_binary",
    "read_embeddings_text",
    "roc_auc",
    "run_classification",
    "run_link_prediction",
    "split_edges",
    "train_logreg",
    "train_one_vs_rest",
    "transform_mass",
    "two_block_sbm",
    "write_binary",
    "write_embeddings_binary",
    "write_embeddings_text",
]
