"""Minimal dense-tensor engine with reverse-mode automatic differentiation."""

from .gradcheck import GradientReport, check_gradients, numerical_gradient
from .ops import conv2d, dense, dropout, flatten, l2_normalize, log_softmax, maxpool2, relu, softmax
from .tensor import TapeNode, Tensor, as_tensor, is_grad_enabled, no_grad

__all__ = [
    "Tensor",
    "TapeNode",
    "as_tensor",
    "no_grad",
    "is_grad_enabled",
    "conv2d",
    "maxpool2",
    "flatten",
    "dense",
    "relu",
    "dropout",
    "softmax",
    "log_softmax",
    "l2_normalize",
    "check_gradients",
    "numerical_gradient",
    "GradientReport",
]
