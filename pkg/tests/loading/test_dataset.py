"""Unit tests for dataset lookup and mini-batching."""

import gzip

import numpy as np
import pytest

from hcloss.data import LabeledDataset, batch_count, dataset_paths, load_dataset, minibatches
from hcloss.errors import DataFormatError


@pytest.fixture
def ten_samples():
    images = np.arange(10, dtype=np.float32).reshape(10, 1, 1, 1)
    return LabeledDataset(images, np.arange(10) % 3, name="toy")


class TestLabeledDataset:
    """Tests for LabeledDataset."""

    def test_head(self, ten_samples):
        """Test that head keeps the first samples and returns self when nothing is cut."""
        head = ten_samples.head(4)
        assert len(head) == 4
        assert ten_samples.head(None) is ten_samples
        assert ten_samples.head(100) is ten_samples

    def test_head_rejects_zero(self, ten_samples):
        """Test that head needs a positive count."""
        with pytest.raises(ValueError, match="positive"):
            ten_samples.head(0)

    def test_label_out_of_range(self):
        """Test that labels outside the class range are rejected."""
        with pytest.raises(DataFormatError, match="labels must lie"):
            LabeledDataset(np.zeros((1, 1, 2, 2)), np.array([10]))

    def test_count_mismatch(self):
        """Test that image and label counts must agree."""
        with pytest.raises(DataFormatError):
            LabeledDataset(np.zeros((2, 1, 2, 2)), np.array([0]))

    def test_read_only(self, ten_samples):
        """Test that the image array cannot be written."""
        with pytest.raises(ValueError):
            ten_samples.images[0, 0, 0, 0] = 1.0


class TestMinibatches:
    """Tests for minibatches."""

    def test_same_seed_and_epoch_same_order(self, ten_samples):
        """Test that seed and epoch fix the batch order."""
        a = [labels.tolist() for _, labels in minibatches(ten_samples, 3, seed=5, epoch=2)]
        b = [labels.tolist() for _, labels in minibatches(ten_samples, 3, seed=5, epoch=2)]
        assert a == b

    def test_epochs_reshuffle(self, ten_samples):
        """Test that a new epoch reshuffles."""
        first = np.concatenate([x.ravel() for x, _ in minibatches(ten_samples, 10, seed=5, epoch=1)])
        second = np.concatenate([x.ravel() for x, _ in minibatches(ten_samples, 10, seed=5, epoch=2)])
        assert not np.array_equal(first, second)

    def test_every_sample_once(self, ten_samples):
        """Test that every sample appears exactly once per epoch."""
        seen = np.concatenate([x.ravel() for x, _ in minibatches(ten_samples, 4, seed=0)])
        assert sorted(seen.tolist()) == list(range(10))

    def test_partial_last_batch(self, ten_samples):
        """Test that the last batch holds the remainder."""
        sizes = [len(labels) for _, labels in minibatches(ten_samples, 4, seed=0)]
        assert sizes == [4, 4, 2]
        assert batch_count(ten_samples, 4) == 3

    def test_batch_size_must_be_positive(self, ten_samples):
        """Test that a batch size of zero is rejected."""
        with pytest.raises(ValueError):
            list(minibatches(ten_samples, 0, seed=0))


class TestDatasetLookup:
    """Tests for locating dataset files under a data root."""

    def test_nested_layout(self, tiny_data_root):
        """Test the <root>/<dataset>/ layout with the t10k test prefix."""
        images, labels = dataset_paths(tiny_data_root, "mnist", "test")
        assert images.name == "t10k-images-idx3-ubyte"
        assert labels.parent.name == "mnist"

    def test_flat_layout_with_gzip(self, tmp_path, write_idx_pair):
        """Test gzipped files placed directly under the root."""
        images_path, labels_path = write_idx_pair(np.zeros((2, 3, 3)), np.array([0, 1]), prefix="train")
        for path in (images_path, labels_path):
            path.with_name(path.name + ".gz").write_bytes(gzip.compress(path.read_bytes()))
            path.unlink()
        data = load_dataset(tmp_path, "fashion-mnist", "train")
        assert len(data) == 2
        assert data.name == "fashion-mnist/train"

    def test_limit(self, tiny_data_root):
        """Test that limit keeps only the first samples."""
        assert len(load_dataset(tiny_data_root, "mnist", "train", limit=10)) == 10

    def test_missing_files(self, tmp_path):
        """Test that a missing split names the expected file."""
        with pytest.raises(FileNotFoundError, match="train-images-idx3-ubyte"):
            dataset_paths(tmp_path, "mnist", "train")

    def test_unknown_dataset(self, tmp_path):
        """Test that an unknown dataset name is rejected."""
        with pytest.raises(ValueError, match="Unknown dataset"):
            dataset_paths(tmp_path, "cifar", "train")
