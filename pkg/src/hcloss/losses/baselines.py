"""Centroid updates that live outside the gradient tape.

Both rules are exponential, biased averaging of embeddings. They are kept as
comparison baselines for the tape-trained Hadamard centroids.
"""

from __future__ import annotations

import numpy as np
from loguru import logger

from ..errors import ShapeError
from .centroids import CentroidBank

DEFAULT_ALPHA = 0.5


def _check_alpha(alpha: float) -> float:
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must be in [0, 1], got {alpha}")
    return float(alpha)


def wen_centroid_update(bank: CentroidBank, embeddings: np.ndarray, labels: np.ndarray, alpha: float = DEFAULT_ALPHA) -> CentroidBank:
    """Blend each present class centre toward its mini-batch mean.

    ``C_k := (1 - alpha) C_k + alpha / n_k * sum_{j in batch, y_j = k} x_j``; classes
    absent from the batch keep their centre.
    """
    alpha = _check_alpha(alpha)
    x = np.asarray(embeddings, dtype=np.float64)
    y = np.asarray(labels, dtype=np.intp)
    if x.ndim != 2 or x.shape[1] != bank.dim or y.shape != (x.shape[0],):
        raise ShapeError(f"expected [B, {bank.dim}] embeddings with B labels, got {x.shape} and {y.shape}")
    for k in np.unique(y):
        batch_mean = x[y == k].mean(axis=0)
        bank.assign((1.0 - alpha) * bank.column(k) + alpha * batch_mean, column=int(k))
    logger.debug(f"Exponential update of {len(np.unique(y))} centroids (alpha={alpha})")
    return bank


def per_sample_centroid_update(bank: CentroidBank, x: np.ndarray, y, alpha: float = DEFAULT_ALPHA) -> CentroidBank:
    """Apply ``C_y := (1 - alpha) C_y + alpha x`` once per sample, in order.

    ``x`` is either one embedding ``[N]`` with a scalar label or a batch ``[B, N]``.
    """
    alpha = _check_alpha(alpha)
    x = np.asarray(x, dtype=np.float64)
    y = np.atleast_1d(np.asarray(y, dtype=np.intp))
    if x.ndim == 1:
        x = x[None, :]
    if x.shape[1] != bank.dim or y.shape != (x.shape[0],):
        raise ShapeError(f"expected [B, {bank.dim}] embeddings with B labels, got {x.shape} and {y.shape}")
    for vector, label in zip(x, y):
        bank.assign((1.0 - alpha) * bank.column(label) + alpha * vector, column=int(label))
    return bank


__all__ = ["DEFAULT_ALPHA", "wen_centroid_update", "per_sample_centroid_update"]
