"""Loss terms: Shannon information of the target class and mini-batch intra-class variance."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..engine import Tensor, log_softmax, no_grad
from ..errors import DistributionError, NonFiniteError, ShapeError
from .centroids import CentroidBank

# Probabilities below this floor make -log p diverge at 64-bit.
PROB_FLOOR = 1e-300
LOG_PROB_FLOOR = float(np.log(PROB_FLOOR))
_DIST_TOL = 1e-9


def _check_labels(labels: np.ndarray, rows: int, num_classes: int) -> np.ndarray:
    labels = np.asarray(labels, dtype=np.intp)
    if labels.shape != (rows,):
        raise ShapeError(f"expected {rows} labels, got shape {labels.shape}")
    if rows and (labels.min() < 0 or labels.max() >= num_classes):
        raise ShapeError(f"labels must lie in [0, {num_classes})")
    return labels


def shannon_info_loss(probs: Tensor, labels: np.ndarray) -> Tensor:
    """Average information ``-(1/N_b) sum_j log p_{y_j}`` of the target classes.

    Raises:
        NonFiniteError: If a target probability falls below ``PROB_FLOOR``.
    """
    if probs.ndim != 2:
        raise ShapeError(f"probabilities must be [N_b, K], got {probs.shape}")
    labels = _check_labels(labels, probs.shape[0], probs.shape[1])
    target = probs.pick(labels)
    if (target.data < PROB_FLOOR).any():
        raise NonFiniteError("target probability underflow, loss diverges")
    return -target.log().mean()


def shannon_info_loss_from_scores(scores: Tensor, labels: np.ndarray) -> Tensor:
    """Same as ``shannon_info_loss(softmax(scores))`` computed through ``log_softmax``."""
    if scores.ndim != 2:
        raise ShapeError(f"scores must be [N_b, K], got {scores.shape}")
    labels = _check_labels(labels, scores.shape[0], scores.shape[1])
    target = log_softmax(scores).pick(labels)
    if (target.data < LOG_PROB_FLOOR).any():
        raise NonFiniteError("target probability underflow, loss diverges")
    return -target.mean()


def _distribution(values: np.ndarray, name: str) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1 or arr.size == 0:
        raise DistributionError(f"{name} must be a non-empty vector")
    if (arr < 0).any() or not np.isfinite(arr).all() or abs(arr.sum() - 1.0) > _DIST_TOL:
        raise DistributionError(f"{name} is not a probability distribution")
    return arr


def entropy(q: np.ndarray) -> float:
    """Shannon entropy ``H(q)`` in nats, with ``0 log 0 = 0``."""
    q = _distribution(q, "q")
    nz = q > 0
    return float(-np.sum(q[nz] * np.log(q[nz])))


def kl_divergence(q: np.ndarray, p: np.ndarray) -> float:
    """``D_KL(q || p) = sum_k q_k log(q_k / p_k)``.

    Raises:
        DistributionError: If shapes differ or ``p_k = 0`` where ``q_k > 0``.
    """
    q, p = _distribution(q, "q"), _distribution(p, "p")
    if q.shape != p.shape:
        raise DistributionError(f"q has {q.size} entries, p has {p.size}")
    nz = q > 0
    if (p[nz] == 0).any():
        raise DistributionError("p vanishes where q has mass")
    return float(np.sum(q[nz] * (np.log(q[nz]) - np.log(p[nz]))))


def cross_entropy(q: np.ndarray, p: np.ndarray) -> float:
    """``H(q, p) = sum_k q_k log(1 / p_k) = H(q) + D_KL(q || p)``."""
    q, p = _distribution(q, "q"), _distribution(p, "p")
    if q.shape != p.shape:
        raise DistributionError(f"q has {q.size} entries, p has {p.size}")
    nz = q > 0
    if (p[nz] == 0).any():
        raise DistributionError("p vanishes where q has mass")
    return float(-np.sum(q[nz] * np.log(p[nz])))


def intra_class_variance_loss(embeddings: Tensor, labels: np.ndarray, bank: CentroidBank) -> Tensor:
    """Mini-batch estimate ``(1/N_b) sum_j ||x_j - C_{y_j}||^2``.

    Gradients reach both the embeddings and the centroid matrix.
    """
    if embeddings.ndim != 2 or embeddings.shape[1] != bank.dim:
        raise ShapeError(f"embeddings must be [N_b, {bank.dim}], got {embeddings.shape}")
    labels = _check_labels(labels, embeddings.shape[0], bank.num_classes)
    centers = bank.hadamard().take(labels, axis=1).T
    diff = embeddings - centers
    return (diff * diff).sum() * (1.0 / embeddings.shape[0])


@dataclass
class LossBreakdown:
    """Components of ``L1 = L0 + lambda * L_var`` for one mini-batch.

    ``objective`` is the tape tensor to call ``backward`` on.
    """

    l0: float
    l_var: float
    lam: float
    total: float
    objective: Optional[Tensor] = field(default=None, repr=False, compare=False)


def combined_loss(scores: Tensor, embeddings: Tensor, labels: np.ndarray, bank: CentroidBank, lam: float) -> LossBreakdown:
    """Shannon information plus ``lam`` times the intra-class variance.

    With ``lam == 0`` the objective is exactly the Shannon term; the variance is
    still reported, computed off-tape.
    """
    if lam < 0:
        raise ValueError(f"lambda must be non-negative, got {lam}")
    l0 = shannon_info_loss_from_scores(scores, labels)
    if lam > 0:
        l_var = intra_class_variance_loss(embeddings, labels, bank)
        objective = l0 + l_var * lam
    else:
        with no_grad():
            l_var = intra_class_variance_loss(embeddings, labels, bank)
        objective = l0
    l0_value, var_value = l0.item(), l_var.item()
    return LossBreakdown(l0=l0_value, l_var=var_value, lam=float(lam), total=l0_value + float(lam) * var_value, objective=objective)


__all__ = [
    "PROB_FLOOR",
    "shannon_info_loss",
    "shannon_info_loss_from_scores",
    "entropy",
    "kl_divergence",
    "cross_entropy",
    "intra_class_variance_loss",
    "LossBreakdown",
    "combined_loss",
]
