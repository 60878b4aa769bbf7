"""Runnable networks built from a parsed architecture."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np
from loguru import logger

from ..engine import Tensor, conv2d, dense, dropout, flatten, l2_normalize, maxpool2, relu
from ..errors import ParseOnlyLayerError, ShapeError
from ..losses import CentroidBank
from .parser import ArchGraph, format_graph
from .shapes import LayerShape, infer_shapes

EMBEDDING_TAPS = ("norm", "x")


@dataclass
class ForwardTaps:
    """Labelled outputs of one forward pass."""

    outputs: Dict[str, Tensor] = field(default_factory=dict)
    last: Optional[Tensor] = None

    def __getitem__(self, label: str) -> Tensor:
        return self.outputs[label]

    def __contains__(self, label: str) -> bool:
        return label in self.outputs

    @property
    def x(self) -> Optional[Tensor]:
        return self.outputs.get("x")

    @property
    def norm(self) -> Optional[Tensor]:
        return self.outputs.get("norm")

    @property
    def embedding(self) -> Optional[Tensor]:
        """The vector the centroids live next to: ``norm`` when present, else ``x``."""
        return next((self.outputs[t] for t in EMBEDDING_TAPS if t in self.outputs), None)

    @property
    def scores(self) -> Tensor:
        return self.outputs.get("scores", self.last)

    @property
    def centers(self) -> Optional[Tensor]:
        return self.outputs.get("centers")


def _he_uniform(rng: np.random.Generator, shape, fan_in: int, dtype) -> np.ndarray:
    limit = np.sqrt(6.0 / fan_in)
    return rng.uniform(-limit, limit, size=shape).astype(dtype)


class Network:
    """Layers of an ``ArchGraph`` with their parameters and the centroid bank.

    Attributes:
        graph: Source architecture.
        shapes: Inferred per-layer shapes.
        params: Layer parameters by name, in layer order.
        bank: Centroid bank of the ``centers`` layer, ``None`` if the graph has none.
        normalize: Whether an l2 normalisation follows the ``x`` tap.
    """

    def __init__(self, graph: ArchGraph, shapes: List[LayerShape], params: Dict[str, Tensor], bank: Optional[CentroidBank], normalize: bool = False):
        self.graph = graph
        self.shapes = shapes
        self.params = params
        self.bank = bank
        self.normalize = normalize and not any(spec.kind == "normalize" for spec in graph.layers)

    @property
    def input_shape(self):
        return self.shapes[0].shape

    @property
    def num_classes(self) -> int:
        scores = self.graph.taps.get("scores", len(self.shapes) - 1)
        return self.shapes[scores].shape[0]

    @property
    def embedding_dim(self) -> Optional[int]:
        taps = self.graph.taps
        for tap in EMBEDDING_TAPS:
            if tap in taps:
                return self.shapes[taps[tap]].shape[0]
        return None

    @property
    def arch_text(self) -> str:
        return format_graph(self.graph)

    def layer_parameters(self) -> List[Tensor]:
        return list(self.params.values())

    def parameters(self) -> List[Tensor]:
        """Layer parameters followed by the centroid matrix."""
        return self.layer_parameters() + ([self.bank.C] if self.bank is not None else [])

    def ensure_bank(self, trainable: bool = True) -> CentroidBank:
        """Attach a zero centroid bank when the graph declares no ``centers`` layer."""
        if self.bank is None:
            dim = self.embedding_dim
            if dim is None:
                raise ShapeError("architecture has no 'x' embedding tap to attach centroids to")
            self.bank = CentroidBank.zeros(dim, self.num_classes, dtype=self.dtype, trainable=trainable)
        return self.bank

    def forward(self, images, training: bool = False, rng: Optional[np.random.Generator] = None) -> ForwardTaps:
        """Run the layers on ``[B, C, H, W]`` images (or a single ``[C, H, W]`` image).

        Args:
            images: Tensor or array of input images.
            training: Enables drop-out, which then draws from ``rng``.
            rng: Random generator of the run.

        Returns:
            The labelled taps; ``embedding`` and ``scores`` are always filled when the graph labels them.
        """
        x = images if isinstance(images, Tensor) else Tensor(np.asarray(images, dtype=self.dtype))
        if x.ndim == 3:
            x = x.reshape((1,) + x.shape)
        if x.shape[1:] != self.input_shape:
            raise ShapeError(f"network expects images of shape {self.input_shape}, got {x.shape[1:]}", 0)

        taps = ForwardTaps()
        if self.graph.input.label:
            taps.outputs[self.graph.input.label] = x
        current = x
        for shape in self.shapes[1:]:
            spec, i = shape.spec, shape.index
            if spec.kind == "conv":
                current = conv2d(current, self.params[f"conv{i}.kernels"], self.params[f"conv{i}.bias"], padding=(spec.size - 1) // 2 if spec.padded else 0, layer=i)
            elif spec.kind == "pool":
                h, w = current.shape[2], current.shape[3]
                crop_h, crop_w = h - h % spec.size, w - w % spec.size
                if (crop_h, crop_w) != (h, w):
                    current = current.take(np.arange(crop_h), axis=2).take(np.arange(crop_w), axis=3)
                current = maxpool2(current, spec.size, layer=i)
            elif spec.kind == "dropout":
                current = dropout(current, spec.rate / 100.0, training, rng)
            elif spec.kind == "dense":
                if shape.flattened:
                    current = flatten(current)
                current = dense(current, self.params[f"dense{i}.weights"], self.params[f"dense{i}.bias"], layer=i)
            elif spec.kind == "normalize":
                current = l2_normalize(current, strict=False)
            elif spec.kind == "label-ref":
                current = taps.outputs[spec.ref]
            elif spec.kind == "centers":
                taps.outputs[spec.label or "centers"] = self.bank.hadamard()
                continue
            if "relu" in spec.activations:
                current = relu(current)
            if spec.label:
                taps.outputs[spec.label] = current
            if spec.label == "x" and self.normalize:
                current = l2_normalize(current, strict=False)
                taps.outputs["norm"] = current
        taps.last = current
        return taps

    __call__ = forward

    def state_dict(self) -> Dict[str, np.ndarray]:
        state = {name: p.data.copy() for name, p in self.params.items()}
        if self.bank is not None:
            state[self.bank.C.name] = self.bank.matrix.copy()
        return state

    def load_state_dict(self, state: Dict[str, np.ndarray]) -> None:
        """Copy arrays into the parameters in place; names and shapes must match exactly."""
        expected = {name: p for name, p in self.params.items()}
        if self.bank is not None:
            expected[self.bank.C.name] = self.bank.C
        missing = sorted(set(expected) - set(state))
        extra = sorted(set(state) - set(expected))
        if missing or extra:
            raise ShapeError(f"parameter mismatch: missing {missing}, unexpected {extra}")
        for name, tensor in expected.items():
            value = np.asarray(state[name])
            if value.shape != tensor.shape:
                raise ShapeError(f"parameter {name}: expected shape {tensor.shape}, got {value.shape}")
            tensor.data[...] = value

    @property
    def dtype(self):
        return self.layer_parameters()[0].dtype if self.params else np.float64

    def __repr__(self) -> str:
        count = sum(p.size for p in self.parameters())
        return f"Network(layers={len(self.graph)}, parameters={count}, normalize={self.normalize})"


def build(
    graph: ArchGraph,
    seed: int,
    input_extent: Optional[int] = None,
    n: int = 2,
    num_classes: int = 10,
    normalize: bool = False,
    dtype=np.float32,
) -> Network:
    """Initialise a network for ``graph``.

    Weights are He-uniform from ``numpy.random.default_rng(seed)`` in layer order,
    biases and centroids start at zero. Building twice with one seed gives identical
    parameters.

    Raises:
        ParseOnlyLayerError: If a layer asks for batch normalisation.
        ShapeError: If the layer chain does not fit together.
    """
    for index, spec in enumerate(graph.layers):
        if "batchnorm" in spec.activations:
            raise ParseOnlyLayerError(f"layer {index} ({spec.kind}): batch normalisation is a parse-only layer and cannot be built")
    shapes = infer_shapes(graph, input_extent, n, num_classes)
    rng = np.random.default_rng(seed)
    params: Dict[str, Tensor] = {}
    bank = None
    for shape in shapes[1:]:
        spec, i = shape.spec, shape.index
        if spec.kind == "conv":
            c_in, c_out, k = shape.input_shape[0], shape.shape[0], spec.size
            params[f"conv{i}.kernels"] = Tensor(_he_uniform(rng, (c_out, c_in, k, k), c_in * k * k, dtype), requires_grad=True, name=f"conv{i}.kernels")
            params[f"conv{i}.bias"] = Tensor(np.zeros(c_out, dtype=dtype), requires_grad=True, name=f"conv{i}.bias")
        elif spec.kind == "dense":
            fan_in = int(np.prod(shape.input_shape))
            out = shape.shape[0]
            params[f"dense{i}.weights"] = Tensor(_he_uniform(rng, (out, fan_in), fan_in, dtype), requires_grad=True, name=f"dense{i}.weights")
            params[f"dense{i}.bias"] = Tensor(np.zeros(out, dtype=dtype), requires_grad=True, name=f"dense{i}.bias")
        elif spec.kind == "centers":
            dim, k = shape.shape
            bank = CentroidBank(np.zeros((dim, k), dtype=dtype), name=spec.ref)
    network = Network(graph, shapes, params, bank, normalize=normalize)
    logger.debug(f"Built {network!r} with seed {seed}")
    return network


__all__ = ["Network", "ForwardTaps", "build"]
