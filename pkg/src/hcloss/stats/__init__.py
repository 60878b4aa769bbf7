"""Scatter and within-class statistics, plus PCA diagnostics."""

from .pca import PcaResult, jacobi_eigh, pca2
from .scatter import (
    ClassStats,
    WeightedSample,
    class_and_grand_means,
    class_centered,
    class_stats,
    covariance,
    scatter,
    variance,
    within_class_covariance,
    within_class_variance,
)

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
    "jacobi_eigh",
    "pca2",
    "PcaResult",
]
