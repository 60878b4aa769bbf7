"""Nearest-centroid and max-score evaluation of a trained network."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from loguru import logger

from ..arch import Network
from ..data import LabeledDataset
from ..engine import Tensor, no_grad
from ..errors import ShapeError
from ..stats import WeightedSample, class_and_grand_means, class_stats

EVAL_BATCH = 500


@dataclass
class Embeddings:
    """Inference-mode outputs for a whole dataset, in dataset order."""

    points: np.ndarray
    scores: np.ndarray
    labels: np.ndarray

    def __len__(self) -> int:
        return len(self.labels)


def compute_embeddings(network: Network, dataset: LabeledDataset, batch_size: int = EVAL_BATCH) -> Embeddings:
    """Run the network without drop-out or tape over ``dataset``.

    Raises:
        ShapeError: If the architecture has no ``x`` embedding tap.
    """
    points, scores = [], []
    with no_grad():
        for start in range(0, len(dataset), batch_size):
            images = dataset.images[start : start + batch_size]
            taps = network.forward(Tensor(images.astype(network.dtype, copy=False)), training=False)
            if taps.embedding is None:
                raise ShapeError("architecture has no 'x' embedding tap")
            points.append(taps.embedding.data.astype(np.float64))
            scores.append(taps.scores.data.astype(np.float64))
    return Embeddings(np.concatenate(points), np.concatenate(scores), np.asarray(dataset.labels))


def class_means(embeddings: Embeddings, num_classes: int) -> np.ndarray:
    """Empirical class means ``[K, n]``; classes absent from the data get NaN rows."""
    stats = class_and_grand_means(WeightedSample.uniform(embeddings.points, embeddings.labels), num_classes)
    means = np.full((num_classes, embeddings.points.shape[1]), np.nan)
    means[stats.classes] = stats.class_means
    return means


def nearest_centroid_predict(points: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    """Index of the Euclidean-nearest row of ``centroids`` (NaN rows never win)."""
    d2 = ((points[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=-1)
    d2 = np.where(np.isnan(d2), np.inf, d2)
    return d2.argmin(axis=1)


def accuracy(predicted: np.ndarray, labels: np.ndarray) -> float:
    """Number of correct decisions over the total number of decisions."""
    if len(labels) == 0:
        return 0.0
    return float(np.mean(np.asarray(predicted) == np.asarray(labels)))


def nearest_centroid_accuracy(network: Network, train_set: LabeledDataset, test_set: LabeledDataset, train_embeddings: Optional[Embeddings] = None, test_embeddings: Optional[Embeddings] = None) -> float:
    """Assign each test embedding to the nearest training-set class mean."""
    train_embeddings = compute_embeddings(network, train_set) if train_embeddings is None else train_embeddings
    test_embeddings = compute_embeddings(network, test_set) if test_embeddings is None else test_embeddings
    means = class_means(train_embeddings, network.num_classes)
    return accuracy(nearest_centroid_predict(test_embeddings.points, means), test_embeddings.labels)


def learned_centroid_accuracy(network: Network, test_set: LabeledDataset, test_embeddings: Optional[Embeddings] = None) -> float:
    """Same decision rule against the learned centroid matrix ``C`` instead of class means."""
    if network.bank is None:
        raise ShapeError("network has no centroid layer")
    test_embeddings = compute_embeddings(network, test_set) if test_embeddings is None else test_embeddings
    return accuracy(nearest_centroid_predict(test_embeddings.points, network.bank.matrix.T.astype(np.float64)), test_embeddings.labels)


def max_score_accuracy(network: Network, test_set: LabeledDataset, test_embeddings: Optional[Embeddings] = None) -> float:
    """Arg-max over the scores, no softmax needed."""
    test_embeddings = compute_embeddings(network, test_set) if test_embeddings is None else test_embeddings
    return accuracy(test_embeddings.scores.argmax(axis=1), test_embeddings.labels)


@dataclass
class CentroidDistances:
    """Per-class ``||C_k - mean_k||`` now and at the zero initialisation (``||mean_k||``)."""

    learned: np.ndarray
    initial: np.ndarray

    @property
    def improved(self) -> np.ndarray:
        return self.learned < self.initial


def centroid_distances(network: Network, train_set: LabeledDataset, train_embeddings: Optional[Embeddings] = None, initial: Optional[np.ndarray] = None) -> CentroidDistances:
    """Distance of every learned centroid to its empirical training-set class mean.

    Args:
        network: Trained network with a centroid layer.
        train_set: Training data defining the class means.
        train_embeddings: Precomputed embeddings of ``train_set``.
        initial: Centroid matrix ``[n, K]`` before training; zeros by default.
    """
    if network.bank is None:
        raise ShapeError("network has no centroid layer")
    train_embeddings = compute_embeddings(network, train_set) if train_embeddings is None else train_embeddings
    means = class_means(train_embeddings, network.num_classes)
    learned = network.bank.matrix.T.astype(np.float64)
    start = np.zeros_like(learned) if initial is None else np.asarray(initial, dtype=np.float64).T
    return CentroidDistances(np.linalg.norm(learned - means, axis=1), np.linalg.norm(start - means, axis=1))


@dataclass
class EvaluationReport:
    nearest_centroid_accuracy: float
    max_score_accuracy: float
    learned_centroid_accuracy: Optional[float]
    distances: Optional[CentroidDistances]


def evaluate(network: Network, train_set: LabeledDataset, test_set: LabeledDataset, initial_centroids: Optional[np.ndarray] = None) -> EvaluationReport:
    """Both accuracy metrics plus the learned-centroid diagnostics, embedding each set once."""
    train_embeddings = compute_embeddings(network, train_set)
    test_embeddings = compute_embeddings(network, test_set)
    report = EvaluationReport(
        nearest_centroid_accuracy=nearest_centroid_accuracy(network, train_set, test_set, train_embeddings, test_embeddings),
        max_score_accuracy=max_score_accuracy(network, test_set, test_embeddings),
        learned_centroid_accuracy=learned_centroid_accuracy(network, test_set, test_embeddings) if network.bank is not None else None,
        distances=centroid_distances(network, train_set, train_embeddings, initial_centroids) if network.bank is not None else None,
    )
    logger.info(f"Nearest-centroid accuracy {report.nearest_centroid_accuracy:.4f}, max-score accuracy {report.max_score_accuracy:.4f}")
    return report


def within_class_spread(embeddings: Embeddings, num_classes: int):
    """``(var_w, trace R_w)`` of the embeddings, equal up to rounding."""
    stats = class_stats(WeightedSample.uniform(embeddings.points, embeddings.labels), num_classes)
    return stats.within_variance, float(np.trace(stats.within_covariance))


__all__ = [
    "Embeddings",
    "EvaluationReport",
    "CentroidDistances",
    "compute_embeddings",
    "class_means",
    "nearest_centroid_predict",
    "accuracy",
    "nearest_centroid_accuracy",
    "learned_centroid_accuracy",
    "max_score_accuracy",
    "centroid_distances",
    "evaluate",
    "within_class_spread",
]
