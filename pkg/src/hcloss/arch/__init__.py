"""Architecture notation: parsing, shape inference and network construction."""

from importlib import resources

from .network import ForwardTaps, Network, build
from .parser import LAYER_KINDS, ArchGraph, LayerSpec, format_graph, format_layer, parse
from .shapes import LayerShape, embedding_dim, format_shape_chain, infer_shapes

PRESETS = ("mnist", "face")


def preset_text(name: str) -> str:
    """Source text of a bundled architecture (``mnist`` or ``face``)."""
    if name not in PRESETS:
        raise ValueError(f"Unknown preset '{name}'. Must be one of {list(PRESETS)}")
    return resources.files(__package__).joinpath("presets", f"{name}.stnn").read_text(encoding="utf-8")


def load_preset(name: str) -> ArchGraph:
    return parse(preset_text(name), name=name)


__all__ = [
    "ArchGraph",
    "LayerSpec",
    "LayerShape",
    "Network",
    "ForwardTaps",
    "LAYER_KINDS",
    "PRESETS",
    "parse",
    "format_graph",
    "format_layer",
    "infer_shapes",
    "format_shape_chain",
    "embedding_dim",
    "build",
    "load_preset",
    "preset_text",
]
