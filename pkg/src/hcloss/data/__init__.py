"""MNIST-style IDX ingestion and mini-batching."""

from .dataset import DATASETS, NUM_CLASSES, LabeledDataset, batch_count, dataset_paths, load_dataset, load_idx, minibatches
from .idx import IMAGES_MAGIC, LABELS_MAGIC, encode_idx, parse_idx, read_idx_pair

__all__ = [
    "LabeledDataset",
    "DATASETS",
    "NUM_CLASSES",
    "load_idx",
    "load_dataset",
    "dataset_paths",
    "minibatches",
    "batch_count",
    "parse_idx",
    "read_idx_pair",
    "encode_idx",
    "IMAGES_MAGIC",
    "LABELS_MAGIC",
]
