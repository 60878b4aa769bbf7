"""Pytest configuration and shared fixtures.

Prepends ``src/`` to sys.path so the tests import ``hcloss`` without an editable
install, and skips ``requires_data`` tests when no MNIST IDX files are found under
``HCLOSS_DATA_ROOT`` (default ``./data``).
"""

import os
import sys
from pathlib import Path

import numpy as np
import pytest

REPO_ROOT = Path(__file__).resolve().parent.parent
if str(REPO_ROOT / "src") not in sys.path:
    sys.path.insert(0, str(REPO_ROOT / "src"))

from hcloss.data import encode_idx  # noqa: E402

TINY_ARCH = """
in:yx:image(8);
conv:3x2::r;
pool:2:m;
dense:n ->x;
dense:K ->scores;
centers(C) ->centers;
"""


def _mnist_available() -> bool:
    root = Path(os.getenv("HCLOSS_DATA_ROOT", REPO_ROOT / "data"))
    return any((d / stem).exists() for d in (root / "mnist", root) for stem in ("train-images-idx3-ubyte", "train-images-idx3-ubyte.gz"))


def pytest_collection_modifyitems(config, items):
    if _mnist_available():
        return
    skip = pytest.mark.skip(reason="MNIST IDX files not found under HCLOSS_DATA_ROOT")
    for item in items:
        if "requires_data" in item.keywords:
            item.add_marker(skip)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def write_idx_pair(tmp_path):
    """Factory writing ``(images uint8 [M,H,W], labels uint8 [M])`` as an IDX file pair."""

    def _write(images, labels, prefix="train", directory=None):
        directory = Path(directory or tmp_path)
        directory.mkdir(parents=True, exist_ok=True)
        images_path = directory / f"{prefix}-images-idx3-ubyte"
        labels_path = directory / f"{prefix}-labels-idx1-ubyte"
        images_path.write_bytes(encode_idx(np.asarray(images, dtype=np.uint8)))
        labels_path.write_bytes(encode_idx(np.asarray(labels, dtype=np.uint8)))
        return images_path, labels_path

    return _write


def blob_images(rng, count, classes=3, extent=8):
    """Tiny separable images: class ``k`` lights up row band ``k`` on a noisy background."""
    labels = rng.integers(0, classes, size=count)
    images = rng.integers(0, 40, size=(count, extent, extent))
    band = extent // classes
    for i, k in enumerate(labels):
        images[i, k * band : (k + 1) * band, :] += 200
    return np.clip(images, 0, 255).astype(np.uint8), labels.astype(np.uint8)


@pytest.fixture
def tiny_data_root(tmp_path, write_idx_pair):
    """A data root with an 8x8, 3-class ``mnist`` layout (96 train / 48 test images)."""
    gen = np.random.default_rng(7)
    root = tmp_path / "data"
    write_idx_pair(*blob_images(gen, 96), prefix="train", directory=root / "mnist")
    write_idx_pair(*blob_images(gen, 48), prefix="t10k", directory=root / "mnist")
    return root


@pytest.fixture
def tiny_arch_file(tmp_path):
    path = tmp_path / "tiny.stnn"
    path.write_text(TINY_ARCH, encoding="utf-8")
    return path


@pytest.fixture
def make_blobs():
    return blob_images


@pytest.fixture
def tiny_arch_text():
    return TINY_ARCH
