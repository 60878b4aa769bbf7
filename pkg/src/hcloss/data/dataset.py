"""Labelled image datasets and deterministic mini-batching."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, Optional, Tuple, Union

import numpy as np
from loguru import logger

from ..errors import DataFormatError
from .idx import read_idx_pair

DATASETS = ("mnist", "fashion-mnist")
SPLITS = {"train": "train", "test": "t10k"}
NUM_CLASSES = 10


@dataclass(frozen=True)
class LabeledDataset:
    """Immutable image set.

    Attributes:
        images: ``[M, 1, H, W]`` pixels scaled to ``[0, 1]``.
        labels: ``[M]`` class indices in ``[0, num_classes)``.
        name: Dataset id, e.g. ``"mnist/train"``.
        num_classes: Number of classes.
    """

    images: np.ndarray
    labels: np.ndarray
    name: str = "dataset"
    num_classes: int = NUM_CLASSES

    def __post_init__(self):
        if self.images.ndim != 4:
            raise DataFormatError(f"{self.name}: images must be [M, C, H, W], got {self.images.shape}")
        if self.images.shape[0] != self.labels.shape[0]:
            raise DataFormatError(f"{self.name}: {self.images.shape[0]} images but {self.labels.shape[0]} labels")
        if self.labels.size and (self.labels.min() < 0 or self.labels.max() >= self.num_classes):
            raise DataFormatError(f"{self.name}: labels must lie in [0, {self.num_classes})")
        self.images.setflags(write=False)
        self.labels.setflags(write=False)

    def __len__(self) -> int:
        return int(self.labels.shape[0])

    @property
    def image_extent(self) -> int:
        return int(self.images.shape[-1])

    def take(self, indices: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        return self.images[indices], self.labels[indices]

    def head(self, limit: Optional[int]) -> "LabeledDataset":
        """First ``limit`` samples (the whole set when ``limit`` is ``None``)."""
        if limit is None or limit >= len(self):
            return self
        if limit < 1:
            raise ValueError(f"limit must be positive, got {limit}")
        return LabeledDataset(self.images[:limit].copy(), self.labels[:limit].copy(), self.name, self.num_classes)


def load_idx(images_path: Union[str, Path], labels_path: Union[str, Path], name: Optional[str] = None, dtype=np.float32) -> LabeledDataset:
    """Load an IDX image/label pair, dividing pixel bytes by 255.

    Raises:
        BadMagicError: A file does not start with the expected magic number.
        TruncatedPayloadError: A file is shorter than its header declares.
        CountMismatchError: The files disagree on the item count.
    """
    raw_images, raw_labels = read_idx_pair(images_path, labels_path)
    if raw_images.ndim != 3:
        raise DataFormatError(f"{images_path}: expected [M, H, W] images, got {raw_images.shape}")
    images = (raw_images.astype(np.float64) / 255.0).astype(dtype)[:, None, :, :]
    labels = raw_labels.astype(np.int64)
    return LabeledDataset(images, labels, name or Path(images_path).name)


def _resolve(root: Path, dataset: str, stem: str) -> Path:
    for directory in (root / dataset, root):
        for candidate in (directory / stem, directory / f"{stem}.gz"):
            if candidate.is_file():
                return candidate
    raise FileNotFoundError(f"{stem}[.gz] not found under {root / dataset} or {root}")


def dataset_paths(root: Union[str, Path], dataset: str, split: str) -> Tuple[Path, Path]:
    """Locate ``{train,t10k}-{images-idx3,labels-idx1}-ubyte[.gz]`` under ``root/<dataset>`` or ``root``."""
    if dataset not in DATASETS:
        raise ValueError(f"Unknown dataset '{dataset}'. Must be one of {list(DATASETS)}")
    if split not in SPLITS:
        raise ValueError(f"Unknown split '{split}'. Must be one of {list(SPLITS)}")
    prefix = SPLITS[split]
    root = Path(root)
    return _resolve(root, dataset, f"{prefix}-images-idx3-ubyte"), _resolve(root, dataset, f"{prefix}-labels-idx1-ubyte")


def load_dataset(root: Union[str, Path], dataset: str, split: str, limit: Optional[int] = None, dtype=np.float32) -> LabeledDataset:
    """Load one split of a bundled dataset, optionally keeping only the first ``limit`` samples."""
    images_path, labels_path = dataset_paths(root, dataset, split)
    data = load_idx(images_path, labels_path, name=f"{dataset}/{split}", dtype=dtype).head(limit)
    logger.info(f"Loaded {len(data)} samples from {images_path.parent} ({dataset}/{split})")
    return data


def epoch_rng(seed: int, epoch: int) -> np.random.Generator:
    return np.random.default_rng([seed, epoch])


def minibatches(dataset: LabeledDataset, batch_size: int, seed: int, epoch: int = 0) -> Iterator[Tuple[np.ndarray, np.ndarray]]:
    """Yield ``(images, labels)`` batches of a permutation drawn from ``(seed, epoch)``.

    Every sample is visited once per epoch; the last batch may be shorter.
    """
    if batch_size < 1:
        raise ValueError(f"batch_size must be at least 1, got {batch_size}")
    order = epoch_rng(seed, epoch).permutation(len(dataset))
    for start in range(0, len(order), batch_size):
        yield dataset.take(order[start : start + batch_size])


def batch_count(dataset: LabeledDataset, batch_size: int) -> int:
    return -(-len(dataset) // batch_size)


__all__ = ["LabeledDataset", "DATASETS", "NUM_CLASSES", "load_idx", "load_dataset", "dataset_paths", "minibatches", "epoch_rng", "batch_count"]
