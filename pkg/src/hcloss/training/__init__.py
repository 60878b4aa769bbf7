"""Training loop, evaluation metrics, run records and exports."""

from .checkpoint import load_checkpoint, save_checkpoint
from .config import BASELINES, LOSSES, OPTIMIZERS, TrainConfig, parse_baseline
from .evaluation import (
    CentroidDistances,
    Embeddings,
    EvaluationReport,
    centroid_distances,
    class_means,
    compute_embeddings,
    evaluate,
    learned_centroid_accuracy,
    max_score_accuracy,
    nearest_centroid_accuracy,
    nearest_centroid_predict,
)
from .export import export_centroid_snapshots, export_embeddings
from .metrics import RunMetrics
from .trainer import EpochRecord, TrainResult, build_network, train

__all__ = [
    "TrainConfig",
    "LOSSES",
    "OPTIMIZERS",
    "BASELINES",
    "parse_baseline",
    "EpochRecord",
    "TrainResult",
    "train",
    "build_network",
    "Embeddings",
    "EvaluationReport",
    "CentroidDistances",
    "compute_embeddings",
    "class_means",
    "nearest_centroid_predict",
    "nearest_centroid_accuracy",
    "learned_centroid_accuracy",
    "max_score_accuracy",
    "centroid_distances",
    "evaluate",
    "RunMetrics",
    "export_embeddings",
    "export_centroid_snapshots",
    "save_checkpoint",
    "load_checkpoint",
]
