"""Classifier and centroid loss functions."""

from .baselines import DEFAULT_ALPHA, per_sample_centroid_update, wen_centroid_update
from .centroids import CentroidBank
from .objectives import (
    PROB_FLOOR,
    LossBreakdown,
    combined_loss,
    cross_entropy,
    entropy,
    intra_class_variance_loss,
    kl_divergence,
    shannon_info_loss,
    shannon_info_loss_from_scores,
)

__all__ = [
    "CentroidBank",
    "LossBreakdown",
    "PROB_FLOOR",
    "DEFAULT_ALPHA",
    "shannon_info_loss",
    "shannon_info_loss_from_scores",
    "entropy",
    "kl_divergence",
    "cross_entropy",
    "intra_class_variance_loss",
    "combined_loss",
    "wen_centroid_update",
    "per_sample_centroid_update",
]
