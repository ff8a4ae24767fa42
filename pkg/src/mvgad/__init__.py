"""mvgad: multi-task anomaly detection for multi-view attributed networks.

Learns per-view graph-convolutional embeddings alongside a community branch
(modularity autoencoder + community GCN), fuses them into one representation,
reconstructs both structure and attributes from it, and ranks nodes by their
reconstruction error.
"""

__version__ = "0.1.0"

from .autodiff import Tensor
from .decoders import AnomalyReport, LossConfig, node_scores, rank_nodes
from .datasets import DatasetError, load_dataset, save_dataset
from .evaluation import EvalResult, auc_roc, evaluate, precision_at_k
from .synthetic import GenConfig, generate
from .graph import (
    ANOMALY_KINDS,
    MultiViewGraph,
    modularity_matrix,
    normalize_adjacency,
)
from .training import (
    CheckpointError,
    ModelDims,
    ModelParams,
    TrainConfig,
    TrainHistory,
    init_params,
    load_checkpoint,
    save_checkpoint,
    score,
    train,
)

__all__ = [
    "ANOMALY_KINDS",
    "AnomalyReport",
    "CheckpointError",
    "DatasetError",
    "EvalResult",
    "GenConfig",
    "LossConfig",
    "ModelDims",
    "ModelParams",
    "MultiViewGraph",
    "Tensor",
    "TrainConfig",
    "TrainHistory",
    "auc_roc",
    "evaluate",
    "generate",
    "init_params",
    "load_checkpoint",
    "load_dataset",
    "modularity_matrix",
    "node_scores",
    "normalize_adjacency",
    "precision_at_k",
    "rank_nodes",
    "save_checkpoint",
    "save_dataset",
    "score",
    "train",
]
