"""Mini-batch training with the Shannon information loss and the intra-class variance term."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, List, Optional

import numpy as np
from loguru import logger

from ..arch import Network, build
from ..data import LabeledDataset, batch_count, minibatches
from ..engine import Tensor, no_grad
from ..errors import DivergenceError, NonFiniteError
from ..losses import CentroidBank, LossBreakdown, combined_loss, per_sample_centroid_update, wen_centroid_update
from ..optim import Optimizer, make_optimizer
from .config import TrainConfig
from .evaluation import compute_embeddings, within_class_spread

# Extra entropy word separating the drop-out stream from the per-epoch shuffles.
DROPOUT_STREAM = 0x0D0
BatchCallback = Callable[[int, int, LossBreakdown], None]


@dataclass
class EpochRecord:
    """Sample-weighted means of the loss terms over one epoch."""

    epoch: int
    l0: float
    l_var: float
    total: float
    batches: int
    var_w: Optional[float] = None
    trace_rw: Optional[float] = None


@dataclass
class TrainResult:
    network: Network
    bank: CentroidBank
    history: List[EpochRecord] = field(default_factory=list)
    snapshots: List[np.ndarray] = field(default_factory=list)
    initial_centroids: Optional[np.ndarray] = None


def dropout_rng(seed: int) -> np.random.Generator:
    return np.random.default_rng([seed, DROPOUT_STREAM, 1])


def build_network(config: TrainConfig, image_extent: int) -> Network:
    """Network of ``config.arch`` for square images of ``image_extent`` pixels."""
    graph = config.arch_graph()
    network = build(
        graph,
        config.seed,
        input_extent=image_extent,
        n=config.embed_dim,
        num_classes=config.num_classes,
        normalize=config.normalize,
        dtype=np.dtype(config.dtype),
    )
    network.ensure_bank()
    return network


def _trainable(config: TrainConfig, network: Network, bank: CentroidBank) -> List[Tensor]:
    # Tape-trained centroids only when the variance term reaches them.
    bank.trainable = config.baseline_kind == "none" and config.effective_lambda > 0
    params = [] if config.freeze_network else network.layer_parameters()
    return params + ([bank.C] if bank.trainable else [])


def _step(config: TrainConfig, network: Network, bank: CentroidBank, optimizer: Optimizer, images: np.ndarray, labels: np.ndarray, rng: np.random.Generator) -> LossBreakdown:
    optimizer.zero_grad()
    if config.freeze_network:
        with no_grad():
            taps = network.forward(images, training=False)
        embedding, scores = Tensor(taps.embedding.data), Tensor(taps.scores.data)
    else:
        taps = network.forward(images, training=True, rng=rng)
        embedding, scores = taps.embedding, taps.scores
    breakdown = combined_loss(scores, embedding, labels, bank, config.effective_lambda)
    if breakdown.objective.requires_grad:
        breakdown.objective.backward()
    optimizer.step()
    kind = config.baseline_kind
    if kind == "wen":
        wen_centroid_update(bank, embedding.data, labels, config.baseline_alpha)
    elif kind == "sample":
        per_sample_centroid_update(bank, embedding.data, labels, config.baseline_alpha)
    return breakdown


def train(config: TrainConfig, dataset: LabeledDataset, network: Optional[Network] = None, on_batch: Optional[BatchCallback] = None) -> TrainResult:
    """Train ``network`` (built from ``config`` when omitted) on ``dataset``.

    With ``shannon+var`` the centroid matrix is an ordinary parameter updated by the
    optimiser through the tape. With a ``wen`` / ``sample`` baseline it is instead
    updated from the batch embeddings after each optimiser step.

    Args:
        config: Validated experiment configuration.
        dataset: Training split.
        network: Pre-built network to continue training.
        on_batch: Called as ``on_batch(epoch, batch, breakdown)`` after every update.

    Returns:
        The trained network and centroids with per-epoch history and centroid snapshots.

    Raises:
        DivergenceError: When a loss, activation or gradient leaves the finite reals;
            carries the 1-based epoch and batch.
    """
    config.validate()
    if len(dataset) == 0:
        raise ValueError("training set is empty")
    if network is None:
        network = build_network(config, dataset.image_extent)
    bank = network.ensure_bank()
    optimizer = make_optimizer(config.optimizer, _trainable(config, network, bank), config.lr, config.momentum)
    rng = dropout_rng(config.seed)
    result = TrainResult(network=network, bank=bank, initial_centroids=bank.matrix.copy())
    total_batches = batch_count(dataset, config.batch_size)
    logger.info(f"Training {network!r} on {len(dataset)} samples: loss={config.loss}, lambda={config.effective_lambda}, {config.epochs} epochs of {total_batches} batches")

    for epoch in range(1, config.epochs + 1):
        sums = np.zeros(3)
        for batch, (images, labels) in enumerate(minibatches(dataset, config.batch_size, config.seed, epoch), start=1):
            try:
                breakdown = _step(config, network, bank, optimizer, images, labels, rng)
            except NonFiniteError as e:
                raise DivergenceError(str(e), epoch, batch) from e
            if not np.isfinite(breakdown.total):
                raise DivergenceError(f"loss is {breakdown.total}", epoch, batch)
            sums += len(labels) * np.array([breakdown.l0, breakdown.l_var, breakdown.total])
            logger.debug(f"epoch {epoch} batch {batch}/{total_batches}: L0={breakdown.l0:.5f} Lvar={breakdown.l_var:.5f}")
            if on_batch is not None:
                on_batch(epoch, batch, breakdown)
        l0, l_var, total = sums / len(dataset)
        record = EpochRecord(epoch, float(l0), float(l_var), float(total), total_batches)
        if config.track_epoch_stats:
            record.var_w, record.trace_rw = within_class_spread(compute_embeddings(network, dataset), config.num_classes)
        result.history.append(record)
        result.snapshots.append(bank.matrix.astype(np.float64))
        logger.info(f"Epoch {epoch}/{config.epochs}: L0={record.l0:.5f} Lvar={record.l_var:.5f} total={record.total:.5f}")
    return result


__all__ = ["EpochRecord", "TrainResult", "train", "build_network", "dropout_rng"]
