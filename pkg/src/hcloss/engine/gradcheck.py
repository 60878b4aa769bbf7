"""Central finite-difference gradient checking for the tape."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Dict, Sequence

import numpy as np

from .tensor import Tensor, no_grad

DEFAULT_STEP = 1e-5
DEFAULT_RTOL = 1e-4


@dataclass
class GradientReport:
    """Relative error per checked input, keyed by position or tensor name."""

    errors: Dict[str, float]

    @property
    def worst(self) -> float:
        return max(self.errors.values()) if self.errors else 0.0

    def passed(self, rtol: float = DEFAULT_RTOL) -> bool:
        return self.worst <= rtol


def numerical_gradient(fn: Callable[[], Tensor], tensor: Tensor, step: float = DEFAULT_STEP) -> np.ndarray:
    """Estimate d fn / d tensor by central differences, perturbing ``tensor`` in place."""
    if not tensor.data.flags.c_contiguous:
        tensor.data = np.ascontiguousarray(tensor.data)
    grad = np.zeros_like(tensor.data, dtype=np.float64)
    flat = tensor.data.reshape(-1)
    out = grad.reshape(-1)
    with no_grad():
        for i in range(flat.size):
            original = flat[i]
            flat[i] = original + step
            plus = fn().item()
            flat[i] = original - step
            minus = fn().item()
            flat[i] = original
            out[i] = (plus - minus) / (2.0 * step)
    return grad


def relative_error(analytic: np.ndarray, numeric: np.ndarray) -> float:
    scale = np.linalg.norm(analytic) + np.linalg.norm(numeric)
    if scale == 0.0:
        return 0.0
    return float(np.linalg.norm(analytic - numeric) / scale)


def check_gradients(fn: Callable[[], Tensor], inputs: Sequence[Tensor], step: float = DEFAULT_STEP) -> GradientReport:
    """Compare tape gradients of the scalar ``fn()`` with central differences.

    Inputs must be float64 leaves with ``requires_grad`` set; their gradients are reset.
    """
    for tensor in inputs:
        if tensor.dtype != np.float64:
            raise TypeError("gradient checks need float64 tensors")
        tensor.zero_grad()
    fn().backward()
    errors: Dict[str, float] = {}
    for position, tensor in enumerate(inputs):
        analytic = tensor.grad if tensor.grad is not None else np.zeros_like(tensor.data)
        key = tensor.name or str(position)
        errors[key] = relative_error(analytic, numerical_gradient(fn, tensor, step))
    return GradientReport(errors)


__all__ = ["GradientReport", "check_gradients", "numerical_gradient", "relative_error", "DEFAULT_STEP", "DEFAULT_RTOL"]
