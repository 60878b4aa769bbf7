"""Shape inference over a parsed architecture."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

from ..errors import ShapeError
from .parser import ArchGraph, Count, LayerSpec


@dataclass(frozen=True)
class LayerShape:
    """Per-sample output shape of one layer.

    Attributes:
        index: Position of the layer in ``ArchGraph.layers``.
        spec: The layer.
        shape: ``(C, H, W)`` for spatial outputs, ``(F,)`` for vectors, ``(n, K)`` for centers.
        input_shape: Shape the layer consumed (``None`` for the input layer).
        flattened: Set on the first dense layer after a spatial one.
    """

    index: int
    spec: LayerSpec
    shape: Tuple[int, ...]
    input_shape: Optional[Tuple[int, ...]] = None
    flattened: bool = False

    @property
    def spatial(self) -> bool:
        return len(self.shape) == 3 and self.spec.kind != "centers"

    @property
    def features(self) -> int:
        return self.shape[0] if not self.spatial else self.shape[0] * self.shape[1] * self.shape[2]


def resolve_count(value: Count, n: int, num_classes: int) -> int:
    if isinstance(value, int):
        return value
    return n if value == "n" else num_classes


def _padding(spec: LayerSpec) -> int:
    return (spec.size - 1) // 2 if spec.padded else 0


def infer_shapes(graph: ArchGraph, input_extent: Optional[int] = None, n: int = 2, num_classes: int = 10) -> List[LayerShape]:
    """Compute the output shape of every layer.

    Args:
        graph: Parsed architecture.
        input_extent: Square image size; defaults to the extent bound in the input clause.
        n: Embedding size bound to the symbol ``n``.
        num_classes: Class count bound to ``K`` / ``P``.

    Returns:
        One ``LayerShape`` per entry of ``graph.layers``.

    Raises:
        ShapeError: Naming the first layer whose input it cannot accept.
    """
    extent = input_extent if input_extent is not None else graph.input.size
    if extent is None:
        raise ShapeError("input extent is not bound; pass it explicitly", 0)
    if extent < 1 or n < 1 or num_classes < 1:
        raise ShapeError(f"input extent, n and class count must be positive (got {extent}, {n}, {num_classes})", 0)

    channels = resolve_count(graph.input.features or 1, n, num_classes)
    shapes: List[LayerShape] = [LayerShape(0, graph.input, (channels, extent, extent))]
    by_label: Dict[str, Tuple[int, ...]] = {}
    if graph.input.label:
        by_label[graph.input.label] = shapes[0].shape
    current = shapes[0].shape

    for index, spec in enumerate(graph.body, start=1):
        flattened = False
        if spec.kind == "conv":
            if len(current) != 3:
                raise ShapeError(f"conv needs a spatial input, got {current}", index)
            c, h, w = current
            pad = _padding(spec)
            oh, ow = h + 2 * pad - spec.size + 1, w + 2 * pad - spec.size + 1
            if oh < 1 or ow < 1:
                raise ShapeError(f"kernel {spec.size} does not fit a {h}x{w} input", index)
            out = (resolve_count(spec.features, n, num_classes), oh, ow)
        elif spec.kind == "pool":
            if len(current) != 3:
                raise ShapeError(f"pool needs a spatial input, got {current}", index)
            c, h, w = current
            if h < spec.size or w < spec.size:
                raise ShapeError(f"pool block {spec.size} larger than the {h}x{w} input", index)
            # an odd trailing row/column is dropped
            out = (c, h // spec.size, w // spec.size)
        elif spec.kind == "dense":
            flattened = len(current) == 3
            out = (resolve_count(spec.features, n, num_classes),)
        elif spec.kind == "normalize":
            if len(current) != 1:
                raise ShapeError(f"norm needs a vector input, got {current}", index)
            out = current
        elif spec.kind == "dropout":
            out = current
        elif spec.kind == "label-ref":
            out = by_label[spec.ref]
        elif spec.kind == "centers":
            tap = "norm" if "norm" in by_label else "x"
            embedding = by_label[tap]
            if len(embedding) != 1:
                raise ShapeError(f"centers need a vector embedding at '{tap}', got {embedding}", index)
            shapes.append(LayerShape(index, spec, (embedding[0], num_classes), embedding))
            if spec.label:
                by_label[spec.label] = shapes[-1].shape
            continue
        else:  # pragma: no cover - parser rejects other kinds
            raise ShapeError(f"unsupported layer kind {spec.kind}", index)
        shapes.append(LayerShape(index, spec, out, current, flattened))
        if spec.label:
            by_label[spec.label] = out
        current = out
    return shapes


def format_shape_chain(shapes: Sequence[LayerShape]) -> str:
    """Render e.g. ``28→26→24→12→10→8→4→flatten 1024→dense 2→dense 10``.

    Spatial extents are listed when they change; the centers matrix is not part of the chain.
    """
    parts: List[str] = []
    last_extent = None
    for item in shapes:
        kind = item.spec.kind
        if kind in ("input", "conv", "pool"):
            extent = item.shape[1]
            if extent != last_extent:
                parts.append(str(extent))
                last_extent = extent
        elif kind == "dense":
            if item.flattened:
                c, h, w = item.input_shape
                parts.append(f"flatten {c * h * w}")
            parts.append(f"dense {item.shape[0]}")
    return "→".join(parts)


def embedding_dim(shapes: Sequence[LayerShape]) -> int:
    """Length of the embedding the centroid layer (or the ``x`` tap) sees."""
    taps = {s.spec.label: s for s in shapes if s.spec.label}
    tap = taps.get("norm") or taps.get("x")
    if tap is None:
        raise ShapeError("architecture has no 'x' embedding tap")
    return tap.shape[0]


__all__ = ["LayerShape", "infer_shapes", "format_shape_chain", "embedding_dim", "resolve_count"]
