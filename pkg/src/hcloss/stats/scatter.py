"""Weighted variance, scatter and within-class statistics of point clouds.

Every statistic takes a ``WeightedSample``: points with positive weights that
sum to one, optionally labelled by class. Uniform weights reduce each function
to its textbook unweighted formula.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple

import numpy as np
from loguru import logger

WEIGHT_TOL = 1e-12
# Upper bound on the pairwise-difference buffer, in array elements.
_SCATTER_BUFFER = 1 << 22


@dataclass
class WeightedSample:
    """Points ``[M, N]`` with a discrete probability ``weights[M]`` and optional labels."""

    points: np.ndarray
    weights: np.ndarray
    labels: Optional[np.ndarray] = None

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=np.float64)
        if self.points.ndim == 1:
            self.points = self.points[:, None]
        self.weights = np.asarray(self.weights, dtype=np.float64)
        if self.points.ndim != 2:
            raise ValueError(f"points must be a [M, N] array, got shape {self.points.shape}")
        if self.weights.shape != (self.points.shape[0],):
            raise ValueError(f"{self.weights.size} weights for {self.points.shape[0]} points")
        if self.points.shape[0] == 0:
            raise ValueError("sample is empty")
        if (self.weights <= 0).any():
            raise ValueError("weights must be strictly positive")
        if abs(self.weights.sum() - 1.0) > WEIGHT_TOL * max(1, self.weights.size):
            raise ValueError(f"weights sum to {self.weights.sum():.15g}, expected 1")
        if self.labels is not None:
            self.labels = np.asarray(self.labels, dtype=np.intp)
            if self.labels.shape != self.weights.shape:
                raise ValueError(f"{self.labels.size} labels for {self.points.shape[0]} points")

    @classmethod
    def uniform(cls, points: np.ndarray, labels: Optional[np.ndarray] = None) -> "WeightedSample":
        points = np.asarray(points, dtype=np.float64)
        m = points.shape[0]
        if m == 0:
            raise ValueError("sample is empty")
        return cls(points, np.full(m, 1.0 / m), labels)

    @classmethod
    def from_raw_weights(cls, points: np.ndarray, weights: np.ndarray, labels: Optional[np.ndarray] = None) -> "WeightedSample":
        """Normalise arbitrary positive weights to a probability."""
        weights = np.asarray(weights, dtype=np.float64)
        return cls(points, weights / weights.sum(), labels)

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def __len__(self) -> int:
        return self.points.shape[0]

    def mean(self) -> np.ndarray:
        return self.weights @ self.points

    def require_labels(self) -> np.ndarray:
        if self.labels is None:
            raise ValueError("this statistic needs a labelled sample")
        return self.labels

    def restrict(self, mask: np.ndarray) -> "WeightedSample":
        """Sub-sample with weights renormalised to one, ``p_{X_k}(x) = p_X(x) / P_k``."""
        w = self.weights[mask]
        labels = None if self.labels is None else self.labels[mask]
        return WeightedSample(self.points[mask], w / w.sum(), labels)


@dataclass
class ClassStats:
    """Per-class and pooled statistics of a labelled sample."""

    classes: np.ndarray
    class_means: np.ndarray
    grand_mean: np.ndarray
    class_masses: np.ndarray
    within_variance: Optional[float] = None
    within_covariance: Optional[np.ndarray] = field(default=None, repr=False)

    def as_dict(self) -> Dict[int, Tuple[float, np.ndarray]]:
        return {int(k): (float(p), m) for k, p, m in zip(self.classes, self.class_masses, self.class_means)}


def variance(sample: WeightedSample) -> float:
    """``var(X) = sum_x p(x) ||x - mean||^2``."""
    centered = sample.points - sample.mean()
    return float(sample.weights @ np.einsum("ij,ij->i", centered, centered))


def scatter(sample: WeightedSample) -> float:
    """Half the doubly weighted sum of pairwise squared distances.

    Computed directly from the double sum, block by block, so it can serve as an
    independent check of ``variance``.
    """
    pts, w = sample.points, sample.weights
    rows = max(1, _SCATTER_BUFFER // pts.size)
    total = 0.0
    for start in range(0, len(pts), rows):
        diff = pts[start : start + rows, None, :] - pts[None, :, :]
        dist = np.einsum("ijk,ijk->ij", diff, diff)
        total += float(w[start : start + rows] @ dist @ w)
    return 0.5 * total


def covariance(sample: WeightedSample) -> np.ndarray:
    """Weighted covariance ``R(X) = sum_x p(x) (x - mean)(x - mean)^T``."""
    centered = sample.points - sample.mean()
    return (centered * sample.weights[:, None]).T @ centered


def class_and_grand_means(sample: WeightedSample, num_classes: Optional[int] = None) -> ClassStats:
    """Class means, class masses ``P_k`` and the grand mean ``sum_k P_k mean_k``.

    Classes in ``range(num_classes)`` without points are dropped with a warning.
    """
    labels = sample.require_labels()
    present = np.unique(labels)
    if num_classes is not None:
        missing = sorted(set(range(num_classes)) - set(present.tolist()))
        if missing:
            logger.warning(f"Classes {missing} have no points and are left out of the statistics")
    masses = np.array([sample.weights[labels == k].sum() for k in present])
    means = np.stack([sample.restrict(labels == k).mean() for k in present])
    grand = masses @ means
    return ClassStats(classes=present, class_means=means, grand_mean=grand, class_masses=masses)


def class_centered(sample: WeightedSample) -> WeightedSample:
    """Sample with every point shifted by its class mean, ``x - mean_{y(x)}``."""
    stats = class_and_grand_means(sample)
    lookup = {int(k): i for i, k in enumerate(stats.classes)}
    rows = np.array([lookup[int(k)] for k in sample.labels])
    return WeightedSample(sample.points - stats.class_means[rows], sample.weights, sample.labels)


def within_class_variance(sample: WeightedSample) -> float:
    """``var_w(X) = sum_k P_k var(X_k)`` with class-renormalised weights."""
    labels = sample.require_labels()
    total = 0.0
    for k in np.unique(labels):
        mask = labels == k
        total += sample.weights[mask].sum() * variance(sample.restrict(mask))
    return float(total)


def within_class_covariance(sample: WeightedSample) -> np.ndarray:
    """``R_w(X) = sum_k P_k R(X_k)``; its trace equals ``within_class_variance``."""
    labels = sample.require_labels()
    total = np.zeros((sample.dim, sample.dim))
    for k in np.unique(labels):
        mask = labels == k
        total += sample.weights[mask].sum() * covariance(sample.restrict(mask))
    return 0.5 * (total + total.T)


def class_stats(sample: WeightedSample, num_classes: Optional[int] = None) -> ClassStats:
    """All of the above for one labelled sample."""
    stats = class_and_grand_means(sample, num_classes)
    stats.within_variance = within_class_variance(sample)
    stats.within_covariance = within_class_covariance(sample)
    return stats


__all__ = [
    "WeightedSample",
    "ClassStats",
    "variance",
    "scatter",
    "covariance",
    "class_and_grand_means",
    "class_centered",
    "within_class_variance",
    "within_class_covariance",
    "class_stats",
]
