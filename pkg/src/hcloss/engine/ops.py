"""Differentiable layer operations used by the architectures in ``hcloss.arch``.

All spatial ops work on ``[B, C, H, W]`` batches and also accept a single
``[C, H, W]`` sample. Convolution is cross-correlation computed through
``numpy.lib.stride_tricks.sliding_window_view``.
"""

from __future__ import annotations

from typing import Optional

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from ..errors import ShapeError, ZeroNormError
from .tensor import Tensor, from_op

L2_EPS = 1e-12


def _batched(x: Tensor, spatial_ndim: int, op: str, layer: Optional[int]) -> tuple[Tensor, bool]:
    if x.ndim == spatial_ndim:
        return x.reshape((1,) + x.shape), True
    if x.ndim == spatial_ndim + 1:
        return x, False
    raise ShapeError(f"{op} expects {spatial_ndim}-D or {spatial_ndim + 1}-D input, got shape {x.shape}", layer)


def conv2d(x: Tensor, kernels: Tensor, bias: Tensor, padding: int = 0, layer: Optional[int] = None) -> Tensor:
    """Valid (or zero-padded) 2-D cross-correlation plus per-channel bias.

    Args:
        x: Input ``[C_in, H, W]`` or ``[B, C_in, H, W]``.
        kernels: ``[C_out, C_in, k, k]``.
        bias: ``[C_out]``.
        padding: Zero padding on each spatial border.
        layer: Layer index used in error messages.

    Returns:
        ``[.., C_out, H + 2p - k + 1, W + 2p - k + 1]``.
    """
    xb, squeeze = _batched(x, 3, "conv2d", layer)
    if kernels.ndim != 4 or kernels.shape[2] != kernels.shape[3]:
        raise ShapeError(f"conv2d kernels must be [C_out, C_in, k, k], got {kernels.shape}", layer)
    c_out, c_in, k, _ = kernels.shape
    batch, channels, height, width = xb.shape
    if channels != c_in:
        raise ShapeError(f"conv2d input has {channels} channels, kernels expect {c_in}", layer)
    if bias.shape != (c_out,):
        raise ShapeError(f"conv2d bias must have shape ({c_out},), got {bias.shape}", layer)
    if height + 2 * padding < k or width + 2 * padding < k:
        raise ShapeError(f"conv2d kernel {k} larger than padded input {height}x{width}", layer)

    xp = xb.data
    if padding:
        xp = np.pad(xp, ((0, 0), (0, 0), (padding, padding), (padding, padding)))
    windows = sliding_window_view(xp, (k, k), axis=(2, 3))  # [B, C, Ho, Wo, k, k]
    out_h, out_w = windows.shape[2], windows.shape[3]
    w = kernels.data
    out = np.tensordot(windows, w, axes=([1, 4, 5], [1, 2, 3]))  # [B, Ho, Wo, C_out]
    out = out.transpose(0, 3, 1, 2) + bias.data[None, :, None, None]
    out = np.ascontiguousarray(out, dtype=xb.dtype)

    def vjp(g: np.ndarray):
        grad_bias = g.sum(axis=(0, 2, 3))
        grad_kernels = np.tensordot(g, windows, axes=([0, 2, 3], [0, 2, 3]))
        grad_xp = np.zeros_like(xp)
        for i in range(k):
            for j in range(k):
                contrib = np.tensordot(g, w[:, :, i, j], axes=([1], [0]))  # [B, Ho, Wo, C_in]
                grad_xp[:, :, i : i + out_h, j : j + out_w] += contrib.transpose(0, 3, 1, 2)
        if padding:
            grad_xp = grad_xp[:, :, padding:-padding, padding:-padding]
        return grad_xp, grad_kernels.astype(w.dtype), grad_bias.astype(w.dtype)

    result = from_op(out, "conv2d", (xb, kernels, bias), vjp)
    return result.reshape(result.shape[1:]) if squeeze else result


def maxpool2(x: Tensor, size: int = 2, layer: Optional[int] = None) -> Tensor:
    """Max over non-overlapping ``size x size`` blocks (stride = block size).

    The backward pass routes the gradient to the first maximal element of each block.

    Raises:
        ShapeError: If a spatial extent is not divisible by ``size``.
    """
    xb, squeeze = _batched(x, 3, "maxpool2", layer)
    batch, channels, height, width = xb.shape
    if height % size or width % size:
        raise ShapeError(f"maxpool2 needs spatial extents divisible by {size}, got {height}x{width}", layer)
    oh, ow = height // size, width // size
    blocks = xb.data.reshape(batch, channels, oh, size, ow, size).transpose(0, 1, 2, 4, 3, 5)
    blocks = blocks.reshape(batch, channels, oh, ow, size * size)
    arg = blocks.argmax(axis=-1)
    out = np.take_along_axis(blocks, arg[..., None], axis=-1)[..., 0]

    def vjp(g: np.ndarray):
        routed = np.zeros_like(blocks)
        np.put_along_axis(routed, arg[..., None], g[..., None], axis=-1)
        routed = routed.reshape(batch, channels, oh, ow, size, size).transpose(0, 1, 2, 4, 3, 5)
        return (routed.reshape(batch, channels, height, width),)

    result = from_op(out, "maxpool2", (xb,), vjp)
    return result.reshape(result.shape[1:]) if squeeze else result


def flatten(x: Tensor) -> Tensor:
    """Collapse everything but the batch axis."""
    return x.reshape(x.shape[0], -1)


def dense(x: Tensor, weights: Tensor, bias: Tensor, layer: Optional[int] = None) -> Tensor:
    """Affine map ``W x + b`` over the last axis of ``x``.

    Args:
        x: ``[M]`` or ``[B, M]``.
        weights: ``[P, M]``.
        bias: ``[P]``.
    """
    if weights.ndim != 2:
        raise ShapeError(f"dense weights must be 2-D, got {weights.shape}", layer)
    p, m = weights.shape
    if x.ndim not in (1, 2) or x.shape[-1] != m:
        raise ShapeError(f"dense expects input of length {m}, got shape {x.shape}", layer)
    if bias.shape != (p,):
        raise ShapeError(f"dense bias must have shape ({p},), got {bias.shape}", layer)
    a, w = x.data, weights.data
    out = a @ w.T + bias.data

    def vjp(g: np.ndarray):
        g2 = g.reshape(-1, p)
        a2 = a.reshape(-1, m)
        return g @ w, g2.T @ a2, g2.sum(axis=0)

    return from_op(out, "dense", (x, weights, bias), vjp)


def relu(x: Tensor) -> Tensor:
    """Elementwise ``max(0, x)``; the subgradient at 0 is 0."""
    mask = x.data > 0
    return from_op(np.where(mask, x.data, 0).astype(x.dtype), "relu", (x,), lambda g: (g * mask,))


def dropout(x: Tensor, rate: float, training: bool, rng: Optional[np.random.Generator] = None) -> Tensor:
    """Inverted dropout: zero each element with probability ``rate``, scale survivors by ``1/(1-rate)``.

    Identity when ``training`` is false or ``rate`` is 0.

    Raises:
        ValueError: If ``rate`` is outside ``[0, 1)``.
    """
    if not 0.0 <= rate < 1.0:
        raise ValueError(f"dropout rate must be in [0, 1), got {rate}")
    if not training or rate == 0.0:
        return x
    if rng is None:
        raise ValueError("dropout in training mode needs the run's random generator")
    keep = rng.random(x.shape) >= rate
    scale = (keep / (1.0 - rate)).astype(x.dtype)
    return from_op(x.data * scale, "dropout", (x,), lambda g: (g * scale,))


def softmax(scores: Tensor, axis: int = -1) -> Tensor:
    """Probabilities ``exp(s_k) / sum_i exp(s_i)``, computed after subtracting the max."""
    shifted = scores.data - scores.data.max(axis=axis, keepdims=True)
    e = np.exp(shifted)
    probs = e / e.sum(axis=axis, keepdims=True, dtype=np.float64).astype(scores.dtype)

    def vjp(g: np.ndarray):
        return (probs * (g - (g * probs).sum(axis=axis, keepdims=True)),)

    return from_op(probs, "softmax", (scores,), vjp)


def log_softmax(scores: Tensor, axis: int = -1) -> Tensor:
    """``log softmax`` through the log-sum-exp shift."""
    shifted = scores.data - scores.data.max(axis=axis, keepdims=True)
    lse = np.log(np.exp(shifted).sum(axis=axis, keepdims=True, dtype=np.float64)).astype(scores.dtype)
    out = shifted - lse
    probs = np.exp(out)

    def vjp(g: np.ndarray):
        return (g - probs * g.sum(axis=axis, keepdims=True),)

    return from_op(out, "log_softmax", (scores,), vjp)


def l2_normalize(x: Tensor, eps: float = L2_EPS, strict: bool = True) -> Tensor:
    """Project each row of ``x`` onto the unit sphere.

    Args:
        x: ``[N]`` or ``[B, N]``.
        eps: Smallest admissible norm.
        strict: When true a norm ``<= eps`` raises; otherwise it is clamped to ``eps``.

    Raises:
        ZeroNormError: In strict mode, naming the first offending sample.
    """
    a = x.data
    norms = np.sqrt(np.sum(a.astype(np.float64) ** 2, axis=-1, keepdims=True))
    short = norms[..., 0] <= eps
    if short.any():
        if strict:
            sample = int(np.flatnonzero(short.reshape(-1))[0])
            raise ZeroNormError(f"cannot normalise sample {sample}: norm {float(norms.reshape(-1)[sample]):.3g} <= {eps}", sample)
        norms = np.maximum(norms, eps)
    norms = norms.astype(x.dtype)
    y = a / norms

    def vjp(g: np.ndarray):
        return ((g - y * (g * y).sum(axis=-1, keepdims=True)) / norms,)

    return from_op(y, "l2_normalize", (x,), vjp)


__all__ = ["conv2d", "maxpool2", "flatten", "dense", "relu", "dropout", "softmax", "log_softmax", "l2_normalize", "L2_EPS"]
