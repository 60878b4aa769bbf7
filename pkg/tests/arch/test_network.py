"""Unit tests for building and running networks from parsed architectures."""

import numpy as np
import pytest

from hcloss.arch import build, load_preset, parse
from hcloss.errors import ParseOnlyLayerError, ShapeError


@pytest.fixture
def mnist_network():
    return build(load_preset("mnist"), seed=3)


class TestBuild:
    """Tests for building a network from a parsed graph."""

    def test_same_seed_same_parameters(self):
        """Test that the same seed initialises identical parameters."""
        a, b = build(load_preset("mnist"), seed=7).state_dict(), build(load_preset("mnist"), seed=7).state_dict()
        assert list(a) == list(b)
        for name in a:
            np.testing.assert_array_equal(a[name], b[name])

    def test_different_seed_differs(self):
        """Test that a different seed initialises different kernels."""
        a, b = build(load_preset("mnist"), seed=1), build(load_preset("mnist"), seed=2)
        assert not np.array_equal(a.params["conv1.kernels"].data, b.params["conv1.kernels"].data)

    def test_parameter_layout(self, mnist_network):
        """Test parameter naming, order and the zero centroid matrix."""
        names = [p.name for p in mnist_network.parameters()]
        assert names[:2] == ["conv1.kernels", "conv1.bias"]
        assert names[-1] == "C"
        assert mnist_network.params["dense9.weights"].shape == (2, 1024)
        np.testing.assert_array_equal(mnist_network.bank.matrix, 0.0)
        assert mnist_network.bank.matrix.shape == (2, 10)

    def test_face_network_is_parse_only(self):
        """Test that batch normalisation layers cannot be built."""
        with pytest.raises(ParseOnlyLayerError, match="batch normalisation"):
            build(load_preset("face"), seed=0)

    def test_ensure_bank_attaches_zero_centroids(self):
        """Test that a graph without centers gets a zero bank once."""
        network = build(parse("in:yx:image(6); dense:n ->x; dense:4 ->scores;"), seed=0, n=3, num_classes=4)
        assert network.bank is None
        bank = network.ensure_bank()
        assert bank.matrix.shape == (3, 4)
        assert network.ensure_bank() is bank

    def test_ensure_bank_needs_embedding(self):
        """Test that a bank needs the 'x' embedding tap."""
        network = build(parse("in:yx:image(6); dense:4;"), seed=0)
        with pytest.raises(ShapeError, match="'x'"):
            network.ensure_bank()


class TestForward:
    """Tests for the forward pass."""

    def test_zero_image_gives_ten_scores(self, mnist_network):
        """Test that one blank image yields ten scores and a 2-D embedding."""
        taps = mnist_network(np.zeros((1, 28, 28), dtype=np.float32))
        assert taps.scores.shape == (1, 10)
        assert taps.x.shape == (1, 2)
        assert taps.centers.shape == (2, 10)

    def test_batch(self, mnist_network, rng):
        """Test that a batch of images gives one score row per image."""
        taps = mnist_network(rng.random((5, 1, 28, 28)).astype(np.float32))
        assert taps.scores.shape == (5, 10)
        assert taps.embedding is taps.x

    def test_inference_is_deterministic(self, mnist_network, rng):
        """Test that inference mode gives the same scores twice."""
        images = rng.random((3, 1, 28, 28)).astype(np.float32)
        np.testing.assert_array_equal(mnist_network(images).scores.data, mnist_network(images).scores.data)

    def test_training_dropout_uses_generator(self, mnist_network, rng):
        """Test that dropout masks come from the supplied generator."""
        images = rng.random((2, 1, 28, 28)).astype(np.float32)
        a = mnist_network(images, training=True, rng=np.random.default_rng(5)).scores.data
        b = mnist_network(images, training=True, rng=np.random.default_rng(5)).scores.data
        np.testing.assert_array_equal(a, b)

    def test_normalize_inserts_unit_embedding(self, tiny_arch_text, rng):
        """Test that normalisation puts the embedding on the unit sphere."""
        network = build(parse(tiny_arch_text), seed=0, num_classes=3, normalize=True)
        taps = network(rng.random((4, 1, 8, 8)))
        np.testing.assert_allclose(np.linalg.norm(taps.norm.data, axis=1), 1.0, rtol=1e-5)
        assert taps.embedding is taps.norm

    def test_odd_extent_is_cropped_before_pooling(self, rng):
        """Test that an odd extent is cropped before 2x2 pooling."""
        network = build(parse("in:yx:image(7); pool:2:m; dense:2;"), seed=0)
        assert network(rng.random((1, 1, 7, 7))).scores.shape == (1, 2)

    def test_wrong_image_shape(self, mnist_network):
        """Test that images of the wrong size are rejected."""
        with pytest.raises(ShapeError, match="expects images"):
            mnist_network(np.zeros((1, 1, 14, 14)))


def test_state_dict_round_trip(rng):
    """Test that loading a state dict reproduces the source network's scores."""
    source = build(load_preset("mnist"), seed=1)
    source.bank.assign(rng.normal(size=(2, 10)).astype(np.float32))
    target = build(load_preset("mnist"), seed=2)
    target.load_state_dict(source.state_dict())
    np.testing.assert_array_equal(target.bank.matrix, source.bank.matrix)
    images = rng.random((2, 1, 28, 28)).astype(np.float32)
    np.testing.assert_array_equal(target(images).scores.data, source(images).scores.data)


def test_load_state_dict_rejects_missing_names():
    """Test that a state dict missing a parameter is rejected."""
    network = build(load_preset("mnist"), seed=1)
    state = network.state_dict()
    del state["C"]
    with pytest.raises(ShapeError, match="missing"):
        network.load_state_dict(state)
