"""Standard stochastic gradient optimisers."""

from .optimizers import ADAM_LR, SGD_MOMENTUM, Adam, AdamState, MomentumSGD, Optimizer, adam_step, make_optimizer, momentum_sgd_step

__all__ = ["AdamState", "adam_step", "momentum_sgd_step", "Optimizer", "Adam", "MomentumSGD", "make_optimizer", "ADAM_LR", "SGD_MOMENTUM"]
