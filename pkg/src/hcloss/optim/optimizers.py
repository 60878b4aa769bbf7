"""Stochastic gradient optimisers: Adam with bias correction and momentum SGD.

The functional ``adam_step`` / ``momentum_sgd_step`` update named numpy arrays in
place. ``Adam`` and ``MomentumSGD`` wrap them for lists of tape tensors, so a
centroid matrix is optimised exactly like a convolution kernel.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping

import numpy as np

from ..engine import Tensor
from ..errors import NonFiniteError, ShapeError

ADAM_LR = 0.001
ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8
SGD_MOMENTUM = 0.9


def _check_grad(name: str, param: np.ndarray, grad: np.ndarray) -> None:
    if grad.shape != param.shape:
        raise ShapeError(f"gradient for '{name}' has shape {grad.shape}, parameter has {param.shape}")
    if not np.isfinite(grad).all():
        raise NonFiniteError(f"non-finite gradient for parameter '{name}'")


@dataclass
class AdamState:
    """Moment estimates and step counter of one Adam run."""

    lr: float = ADAM_LR
    beta1: float = ADAM_BETA1
    beta2: float = ADAM_BETA2
    eps: float = ADAM_EPS
    t: int = 0
    m: Dict[str, np.ndarray] = field(default_factory=dict)
    v: Dict[str, np.ndarray] = field(default_factory=dict)


def adam_step(params: Mapping[str, np.ndarray], grads: Mapping[str, np.ndarray], state: AdamState) -> AdamState:
    """One bias-corrected Adam update of ``params`` (in place).

    Raises:
        NonFiniteError: Naming the first parameter with a NaN/Inf gradient; nothing is updated.
    """
    for name, param in params.items():
        _check_grad(name, param, grads[name])
    state.t += 1
    bc1 = 1.0 - state.beta1**state.t
    bc2 = 1.0 - state.beta2**state.t
    step_size = state.lr / bc1
    for name, param in params.items():
        g = grads[name].astype(np.float64)
        if name not in state.m:
            state.m[name] = np.zeros(param.shape, dtype=np.float64)
            state.v[name] = np.zeros(param.shape, dtype=np.float64)
        m, v = state.m[name], state.v[name]
        m *= state.beta1
        m += (1.0 - state.beta1) * g
        v *= state.beta2
        v += (1.0 - state.beta2) * (g * g)
        denom = np.sqrt(v / bc2) + state.eps
        param -= (step_size * m / denom).astype(param.dtype)
    return state


def momentum_sgd_step(
    params: Mapping[str, np.ndarray],
    grads: Mapping[str, np.ndarray],
    velocity: Dict[str, np.ndarray],
    lr: float,
    momentum: float = SGD_MOMENTUM,
) -> Dict[str, np.ndarray]:
    """``v := momentum * v + g``; ``p := p - lr * v`` (in place)."""
    for name, param in params.items():
        _check_grad(name, param, grads[name])
    for name, param in params.items():
        g = grads[name].astype(np.float64)
        if name not in velocity:
            velocity[name] = np.zeros(param.shape, dtype=np.float64)
        v = velocity[name]
        v *= momentum
        v += g
        param -= (lr * v).astype(param.dtype)
    return velocity


class Optimizer:
    """Shared bookkeeping for tensor optimisers."""

    def __init__(self, params: Iterable[Tensor]):
        self.params: List[Tensor] = list(params)
        names = [p.name or f"param{i}" for i, p in enumerate(self.params)]
        if len(set(names)) != len(names):
            raise ValueError(f"parameter names must be unique: {names}")
        self.names = names

    def zero_grad(self) -> None:
        for p in self.params:
            p.zero_grad()

    def _collect(self):
        values = {}
        grads = {}
        for name, p in zip(self.names, self.params):
            if not p.requires_grad:
                continue
            values[name] = p.data
            grads[name] = p.grad if p.grad is not None else np.zeros_like(p.data)
        return values, grads

    def step(self) -> None:  # pragma: no cover - abstract
        raise NotImplementedError


class Adam(Optimizer):
    def __init__(self, params: Iterable[Tensor], lr: float = ADAM_LR, beta1: float = ADAM_BETA1, beta2: float = ADAM_BETA2, eps: float = ADAM_EPS):
        super().__init__(params)
        self.state = AdamState(lr=lr, beta1=beta1, beta2=beta2, eps=eps)

    def step(self) -> None:
        values, grads = self._collect()
        adam_step(values, grads, self.state)


class MomentumSGD(Optimizer):
    def __init__(self, params: Iterable[Tensor], lr: float, momentum: float = SGD_MOMENTUM):
        super().__init__(params)
        self.lr = lr
        self.momentum = momentum
        self.velocity: Dict[str, np.ndarray] = {}

    def step(self) -> None:
        values, grads = self._collect()
        momentum_sgd_step(values, grads, self.velocity, self.lr, self.momentum)


def make_optimizer(kind: str, params: Iterable[Tensor], lr: float, momentum: float = SGD_MOMENTUM) -> Optimizer:
    """Build ``adam`` or ``msgd`` by name."""
    if kind == "adam":
        return Adam(params, lr=lr)
    if kind == "msgd":
        return MomentumSGD(params, lr=lr, momentum=momentum)
    raise ValueError(f"Unknown optimizer '{kind}'. Must be one of ['adam', 'msgd']")


__all__ = [
    "AdamState",
    "adam_step",
    "momentum_sgd_step",
    "Optimizer",
    "Adam",
    "MomentumSGD",
    "make_optimizer",
    "ADAM_LR",
    "SGD_MOMENTUM",
]
