"""Dense tensors with a reverse-mode autodiff tape.

A ``Tensor`` wraps a numpy array. Every differentiable operation applied to
tensors that require gradients records a ``TapeNode`` on its output holding
the operation name, its inputs and a vector-Jacobian closure over the saved
activations. ``Tensor.backward`` walks that graph once in reverse topological
order and accumulates gradients into the leaves.
"""

from __future__ import annotations

import contextlib
from dataclasses import dataclass
from typing import Callable, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np

from ..errors import NonFiniteError, ShapeError

ArrayLike = Union[np.ndarray, float, int, Sequence]
VJP = Callable[[np.ndarray], Sequence[Optional[np.ndarray]]]

_GRAD_ENABLED = True


@contextlib.contextmanager
def no_grad() -> Iterator[None]:
    """Disable tape recording inside the block."""
    global _GRAD_ENABLED
    previous = _GRAD_ENABLED
    _GRAD_ENABLED = False
    try:
        yield
    finally:
        _GRAD_ENABLED = previous


def is_grad_enabled() -> bool:
    return _GRAD_ENABLED


def _check_finite(values: np.ndarray, what: str) -> None:
    if not np.isfinite(values).all():
        raise NonFiniteError(f"non-finite values produced by {what}")


@dataclass(eq=False)
class TapeNode:
    """One recorded operation.

    Attributes:
        op: Operation identifier, e.g. ``"conv2d"``.
        parents: Input tensors, in argument order.
        vjp: Maps the output gradient to one gradient per parent (``None`` to skip).
    """

    op: str
    parents: Tuple["Tensor", ...]
    vjp: VJP


class Tensor:
    """N-dimensional float array with an optional gradient slot."""

    __slots__ = ("data", "requires_grad", "grad", "node", "name")

    def __init__(self, data: ArrayLike, requires_grad: bool = False, dtype: Optional[np.dtype] = None, name: Optional[str] = None):
        arr = np.asarray(data, dtype=dtype)
        if arr.dtype.kind != "f":
            arr = arr.astype(np.float64)
        _check_finite(arr, name or "tensor construction")
        self.data: np.ndarray = arr
        self.requires_grad = requires_grad
        self.grad: Optional[np.ndarray] = None
        self.node: Optional[TapeNode] = None
        self.name = name

    # ------------------------------------------------------------------ info
    @property
    def shape(self) -> Tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return int(self.data.size)

    @property
    def dtype(self) -> np.dtype:
        return self.data.dtype

    def item(self) -> float:
        if self.size != 1:
            raise ShapeError(f"item() needs a single value, tensor has shape {self.shape}")
        return float(self.data.reshape(-1)[0])

    def numpy(self) -> np.ndarray:
        return self.data

    def detach(self) -> "Tensor":
        return Tensor(self.data)

    def zero_grad(self) -> None:
        self.grad = None

    def __repr__(self) -> str:
        label = f" name={self.name!r}" if self.name else ""
        op = f" op={self.node.op!r}" if self.node is not None else ""
        return f"Tensor(shape={self.shape}, dtype={self.dtype}{label}{op}, requires_grad={self.requires_grad})"

    # ------------------------------------------------------------- backward
    def backward(self, grad: Optional[np.ndarray] = None) -> None:
        """Accumulate d(self)/d(leaf) into every leaf that requires gradients.

        Repeated calls without ``zero_grad`` accumulate.

        Raises:
            ShapeError: If ``self`` is not a scalar and no seed gradient is given.
            NonFiniteError: If a propagated gradient is NaN or Inf.
        """
        if grad is None:
            if self.size != 1:
                raise ShapeError(f"backward() needs a scalar root, got shape {self.shape}")
            grad = np.ones_like(self.data)
        grad = np.asarray(grad, dtype=self.data.dtype)
        if grad.shape != self.shape:
            raise ShapeError(f"seed gradient shape {grad.shape} does not match {self.shape}")

        order = _topological_order(self)
        pending = {id(self): grad}
        for tensor in reversed(order):
            g = pending.pop(id(tensor), None)
            if g is None:
                continue
            if tensor.node is None:
                if tensor.requires_grad:
                    _check_finite(g, f"gradient of {tensor.name or 'leaf'}")
                    tensor.grad = g.copy() if tensor.grad is None else tensor.grad + g
                continue
            parent_grads = tensor.node.vjp(g)
            for parent, pg in zip(tensor.node.parents, parent_grads):
                if pg is None or not parent.requires_grad:
                    continue
                if pg.shape != parent.shape:
                    raise ShapeError(f"{tensor.node.op} produced gradient {pg.shape} for input {parent.shape}")
                key = id(parent)
                pending[key] = pg if key not in pending else pending[key] + pg

    # ----------------------------------------------------------- arithmetic
    def __add__(self, other: Union["Tensor", float]) -> "Tensor":
        other = as_tensor(other, self.dtype)
        a_shape, b_shape = self.shape, other.shape
        return from_op(
            self.data + other.data,
            "add",
            (self, other),
            lambda g: (unbroadcast(g, a_shape), unbroadcast(g, b_shape)),
        )

    __radd__ = __add__

    def __neg__(self) -> "Tensor":
        return from_op(-self.data, "neg", (self,), lambda g: (-g,))

    def __sub__(self, other: Union["Tensor", float]) -> "Tensor":
        other = as_tensor(other, self.dtype)
        a_shape, b_shape = self.shape, other.shape
        return from_op(
            self.data - other.data,
            "sub",
            (self, other),
            lambda g: (unbroadcast(g, a_shape), unbroadcast(-g, b_shape)),
        )

    def __rsub__(self, other: Union["Tensor", float]) -> "Tensor":
        return as_tensor(other, self.dtype) - self

    def __mul__(self, other: Union["Tensor", float]) -> "Tensor":
        other = as_tensor(other, self.dtype)
        a, b = self.data, other.data
        return from_op(
            a * b,
            "mul",
            (self, other),
            lambda g: (unbroadcast(g * b, a.shape), unbroadcast(g * a, b.shape)),
        )

    __rmul__ = __mul__

    def __truediv__(self, other: float) -> "Tensor":
        if isinstance(other, Tensor):
            raise TypeError("division is only supported by a constant")
        return self * (1.0 / float(other))

    def __pow__(self, exponent: float) -> "Tensor":
        a = self.data
        p = float(exponent)
        return from_op(a**p, "pow", (self,), lambda g: (g * p * a ** (p - 1.0),))

    def log(self) -> "Tensor":
        a = self.data
        if (a <= 0).any():
            raise NonFiniteError("log of a non-positive value")
        return from_op(np.log(a), "log", (self,), lambda g: (g / a,))

    # ----------------------------------------------------------- reductions
    def sum(self, axis: Optional[Union[int, Tuple[int, ...]]] = None, keepdims: bool = False) -> "Tensor":
        shape = self.shape
        # 64-bit accumulation regardless of storage precision
        out = np.sum(self.data, axis=axis, keepdims=keepdims, dtype=np.float64).astype(self.dtype)

        def vjp(g: np.ndarray):
            if axis is not None and not keepdims:
                g = np.expand_dims(g, axis)
            return (np.broadcast_to(g, shape).astype(self.dtype, copy=True),)

        return from_op(out, "sum", (self,), vjp)

    def mean(self, axis: Optional[Union[int, Tuple[int, ...]]] = None, keepdims: bool = False) -> "Tensor":
        count = self.size if axis is None else int(np.prod([self.shape[a] for a in np.atleast_1d(axis)]))
        return self.sum(axis=axis, keepdims=keepdims) * (1.0 / count)

    # ------------------------------------------------------------- reshaping
    def reshape(self, *shape: int) -> "Tensor":
        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        original = self.shape
        return from_op(self.data.reshape(shape), "reshape", (self,), lambda g: (g.reshape(original),))

    def transpose(self, *axes: int) -> "Tensor":
        axes = axes or tuple(reversed(range(self.ndim)))
        inverse = tuple(np.argsort(axes))
        return from_op(np.transpose(self.data, axes), "transpose", (self,), lambda g: (np.transpose(g, inverse),))

    @property
    def T(self) -> "Tensor":
        return self.transpose()

    def take(self, indices: np.ndarray, axis: int = 0) -> "Tensor":
        """Gather slices along ``axis``; repeated indices accumulate in backward."""
        idx = np.asarray(indices, dtype=np.intp)
        shape = self.shape

        def vjp(g: np.ndarray):
            out = np.zeros(shape, dtype=g.dtype)
            moved = np.moveaxis(out, axis, 0)
            np.add.at(moved, idx, np.moveaxis(g, axis, 0))
            return (out,)

        return from_op(np.take(self.data, idx, axis=axis), "take", (self,), vjp)

    def pick(self, labels: np.ndarray) -> "Tensor":
        """Select ``self[j, labels[j]]`` for every row of a 2-D tensor."""
        if self.ndim != 2:
            raise ShapeError(f"pick() needs a 2-D tensor, got shape {self.shape}")
        rows = np.arange(self.shape[0])
        cols = np.asarray(labels, dtype=np.intp)
        if cols.shape != (self.shape[0],):
            raise ShapeError(f"{cols.shape[0] if cols.ndim else 0} labels for {self.shape[0]} rows")
        shape = self.shape

        def vjp(g: np.ndarray):
            out = np.zeros(shape, dtype=g.dtype)
            out[rows, cols] = g
            return (out,)

        return from_op(self.data[rows, cols], "pick", (self,), vjp)


def as_tensor(value: Union[Tensor, ArrayLike], dtype: Optional[np.dtype] = None) -> Tensor:
    if isinstance(value, Tensor):
        return value
    return Tensor(value, dtype=dtype)


def from_op(data: np.ndarray, op: str, parents: Sequence[Tensor], vjp: VJP) -> Tensor:
    """Wrap an op result, recording it on the tape when any input needs gradients."""
    _check_finite(data, op)
    out = Tensor.__new__(Tensor)
    out.data = data
    out.grad = None
    out.name = None
    out.node = None
    out.requires_grad = False
    if _GRAD_ENABLED and any(p.requires_grad for p in parents):
        out.requires_grad = True
        out.node = TapeNode(op, tuple(parents), vjp)
    return out


def unbroadcast(grad: np.ndarray, shape: Tuple[int, ...]) -> np.ndarray:
    """Sum ``grad`` down to ``shape`` after numpy broadcasting."""
    if grad.shape == shape:
        return grad
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, extent in enumerate(shape):
        if extent == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


def _topological_order(root: Tensor) -> List[Tensor]:
    order: List[Tensor] = []
    visited = set()
    stack: List[Tuple[Tensor, bool]] = [(root, False)]
    while stack:
        tensor, expanded = stack.pop()
        if expanded:
            order.append(tensor)
            continue
        if id(tensor) in visited:
            continue
        visited.add(id(tensor))
        stack.append((tensor, True))
        if tensor.node is not None:
            for parent in tensor.node.parents:
                if id(parent) not in visited:
                    stack.append((parent, False))
    return order


__all__ = ["Tensor", "TapeNode", "as_tensor", "from_op", "no_grad", "is_grad_enabled", "unbroadcast"]
