"""Fixtures for the training tests: the tiny 3-class dataset and a matching config."""

import numpy as np
import pytest

from hcloss.data import load_dataset
from hcloss.training import TrainConfig


@pytest.fixture
def tiny_train(tiny_data_root):
    return load_dataset(tiny_data_root, "mnist", "train", dtype=np.float64)


@pytest.fixture
def tiny_test(tiny_data_root):
    return load_dataset(tiny_data_root, "mnist", "test", dtype=np.float64)


@pytest.fixture
def tiny_config(tiny_arch_file):
    return TrainConfig(arch=str(tiny_arch_file), num_classes=3, epochs=2, batch_size=16, lr=0.01, seed=3, lam=0.1, dtype="float64")
