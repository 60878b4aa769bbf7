"""Unit tests for the architecture notation parser and printer."""

import pytest

from hcloss.arch import PRESETS, format_graph, load_preset, parse, preset_text
from hcloss.errors import (
    ArchParseError,
    DuplicateLabelError,
    MalformedAttributeError,
    UnknownLayerError,
    UnknownOptionError,
    UnresolvedReferenceError,
)


class TestPresets:
    """Tests for the bundled architectures."""

    def test_mnist_layers(self):
        """Test the layer sequence and taps of the mnist preset."""
        graph = load_preset("mnist")
        assert graph.name == "mnist"
        assert len(graph.body) == 11
        assert [s.kind for s in graph.body] == ["conv", "conv", "pool", "dropout", "conv", "conv", "pool", "dropout", "dense", "dense", "centers"]
        assert graph.taps["x"] == 9
        assert graph.centers.ref == "C"

    def test_mnist_convolutions_are_valid(self):
        """Test that the mnist convolutions are 3x3 and unpadded."""
        convs = [s for s in load_preset("mnist").body if s.kind == "conv"]
        assert [(s.size, s.features) for s in convs] == [(3, 16), (3, 32), (3, 64), (3, 64)]
        assert not any(s.padded for s in convs)

    def test_face_uses_padded_batchnorm_blocks(self):
        """Test that every face convolution is padded with batchnorm and ReLU."""
        graph = load_preset("face")
        convs = [s for s in graph.body if s.kind == "conv"]
        assert len(convs) == 18
        assert all(s.padded and s.activations == ("batchnorm", "relu") for s in convs)
        assert graph.input.size == 112
        assert "norm" in graph.taps

    @pytest.mark.parametrize("name", PRESETS)
    def test_round_trip(self, name):
        """Test that printing and re-parsing a preset gives the same graph."""
        graph = load_preset(name)
        assert parse(format_graph(graph)) == graph

    def test_unknown_preset(self):
        """Test that an unknown preset name is rejected."""
        with pytest.raises(ValueError, match="Unknown preset"):
            preset_text("cifar")


class TestGrammar:
    """Tests for well-formed input."""

    def test_two_layer_graph(self):
        """Test the smallest useful graph."""
        graph = parse("in:yx:image(4); dense:3;")
        assert len(graph) == 2
        assert graph.body[0].features == 3

    def test_comments_and_whitespace(self):
        """Test that comments and extra whitespace are ignored."""
        graph = parse("# header\nin:yx:image(4);   # trailing\n\n  dense:n ->x ;\n")
        assert graph.taps == {"x": 1}

    def test_channels_on_input(self):
        """Test that an input channel count is parsed."""
        assert parse("in:yx/3:rgb(32); dense:2;").input.features == 3

    def test_symbols_are_kept_unresolved(self):
        """Test that symbolic sizes stay symbolic after parsing."""
        assert parse("in:yx:image(4); dense:K;").body[0].features == "K"

    def test_label_reference(self):
        """Test that a from: clause refers back to a label."""
        graph = parse("in:yx:image(4); dense:n ->x; dense:2; from:x; dense:3;")
        assert graph.body[2].kind == "label-ref"
        assert graph.body[2].ref == "x"

    def test_positions_are_one_based(self):
        """Test that layer positions are 1-based line and column."""
        graph = parse("in:yx:image(4);\n  dense:2;")
        assert (graph.body[0].line, graph.body[0].column) == (2, 3)


class TestErrors:
    """Tests for the five error categories."""

    def test_unknown_layer_kind(self):
        """Test that an unknown kind is reported with its position."""
        with pytest.raises(UnknownLayerError) as info:
            parse("in:yx:image(4);\nlstm:8;")
        assert (info.value.line, info.value.column) == (2, 1)
        assert "unknown layer kind" in str(info.value)

    def test_unknown_pooling_technique(self):
        """Test that an unknown pooling option is reported."""
        with pytest.raises(UnknownOptionError, match="unknown pooling technique 'q'"):
            parse("in:yx:image(8); pool:3:q;")

    def test_unknown_activation(self):
        """Test that an unknown activation is reported."""
        with pytest.raises(UnknownOptionError, match="activation"):
            parse("in:yx:image(8); conv:3x2::z;")

    def test_duplicate_label(self):
        """Test that a label defined twice is reported."""
        with pytest.raises(DuplicateLabelError):
            parse("in:yx:image(8); dense:4 ->x; dense:2 ->x;")

    def test_undefined_reference(self):
        """Test that a reference to an undefined label is reported."""
        with pytest.raises(UnresolvedReferenceError, match="'y'"):
            parse("in:yx:image(8); dense:4 ->x; from:y;")

    def test_unknown_symbol(self):
        """Test that an unknown size symbol is reported."""
        with pytest.raises(UnresolvedReferenceError, match="unknown symbol 'm'"):
            parse("in:yx:image(8); dense:m;")

    def test_centers_without_embedding(self):
        """Test that centers needs an 'x' embedding to refer to."""
        with pytest.raises(UnresolvedReferenceError):
            parse("in:yx:image(8); dense:4; centers(C);")

    @pytest.mark.parametrize(
        "text",
        [
            "in:yx:image(8); conv:3;",
            "in:yx:image(8); conv:0x4;",
            "in:yx:image(8); drop:150;",
            "in:yx:image(8); dense:4",
            "dense:4;",
            "in:yx:image(8); in:yx:image(8);",
        ],
    )
    def test_malformed(self, text):
        """Test that malformed attributes and clauses are reported."""
        with pytest.raises(MalformedAttributeError):
            parse(text)

    def test_all_categories_share_a_base(self):
        """Test that every category derives from ArchParseError."""
        for error in (UnknownLayerError, MalformedAttributeError, DuplicateLabelError, UnresolvedReferenceError, UnknownOptionError):
            assert issubclass(error, ArchParseError)
