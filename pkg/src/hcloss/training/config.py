"""Experiment configuration."""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Mapping, Optional, Tuple

from ..arch import PRESETS, ArchGraph, load_preset, parse, preset_text
from ..data import DATASETS
from ..errors import ConfigError
from ..losses import DEFAULT_ALPHA
from ..optim import SGD_MOMENTUM
from ..settings import DTYPES

LOSSES = ("shannon", "shannon+var")
OPTIMIZERS = ("adam", "msgd")
BASELINES = ("none", "wen", "sample")


def parse_baseline(value: str) -> Tuple[str, float]:
    """Split ``none`` / ``wen:0.5`` / ``sample:0.5`` into kind and alpha."""
    kind, _, alpha = value.partition(":")
    if kind not in BASELINES:
        raise ConfigError("baseline", f"unknown centroid baseline '{kind}'. Must be one of {list(BASELINES)}")
    if kind == "none":
        if alpha:
            raise ConfigError("baseline", "'none' takes no alpha")
        return kind, 0.0
    try:
        a = float(alpha) if alpha else DEFAULT_ALPHA
    except ValueError:
        raise ConfigError("baseline", f"alpha must be a number, got '{alpha}'") from None
    if not 0.0 <= a <= 1.0:
        raise ConfigError("baseline", f"alpha must be in [0, 1], got {a}")
    return kind, a


@dataclass(frozen=True)
class TrainConfig:
    """Everything that determines a training run.

    Attributes:
        dataset: ``mnist`` or ``fashion-mnist``.
        arch: Bundled preset name or path to a ``.stnn`` file.
        embed_dim: Embedding size ``n``.
        normalize: Project embeddings onto the unit sphere.
        loss: ``shannon`` or ``shannon+var``.
        lam: Weight of the intra-class variance term; ignored for ``shannon``.
        epochs: Passes over the training set.
        batch_size: Mini-batch size ``N_b``.
        lr: Learning rate.
        seed: Seed for initialisation, shuffling and drop-out.
        optimizer: ``adam`` or ``msgd``.
        momentum: Momentum of ``msgd``.
        baseline: ``none`` or an out-of-tape centroid rule, ``wen:alpha`` / ``sample:alpha``.
        train_limit: Keep only the first samples of the training split.
        test_limit: Keep only the first samples of the test split.
        dtype: Training precision.
        freeze_network: Optimise only the centroids, with the network in inference mode.
        track_epoch_stats: Record within-class variance of the training embeddings after each epoch.
        num_classes: Class count ``K``.
    """

    dataset: str = "mnist"
    arch: str = "mnist"
    embed_dim: int = 2
    normalize: bool = False
    loss: str = "shannon+var"
    lam: float = 0.05
    epochs: int = 20
    batch_size: int = 256
    lr: float = 0.001
    seed: int = 0
    optimizer: str = "adam"
    momentum: float = SGD_MOMENTUM
    baseline: str = "none"
    train_limit: Optional[int] = None
    test_limit: Optional[int] = None
    dtype: str = "float32"
    freeze_network: bool = False
    track_epoch_stats: bool = False
    num_classes: int = 10

    def validate(self) -> "TrainConfig":
        """Check every field, naming the CLI flag of the first bad one.

        Raises:
            ConfigError: On the first invalid value.
        """
        if self.dataset not in DATASETS:
            raise ConfigError("dataset", f"unknown dataset '{self.dataset}'. Must be one of {list(DATASETS)}")
        if self.arch not in PRESETS and not Path(self.arch).is_file():
            raise ConfigError("arch", f"'{self.arch}' is neither a preset {list(PRESETS)} nor an existing file")
        if self.embed_dim < 1:
            raise ConfigError("embed-dim", f"must be at least 1, got {self.embed_dim}")
        if self.loss not in LOSSES:
            raise ConfigError("loss", f"unknown loss '{self.loss}'. Must be one of {list(LOSSES)}")
        if not math.isfinite(self.lam) or self.lam < 0:
            raise ConfigError("lambda", f"must be a non-negative number, got {self.lam}")
        if self.epochs < 1:
            raise ConfigError("epochs", f"must be at least 1, got {self.epochs}")
        if self.batch_size < 1:
            raise ConfigError("batch-size", f"must be at least 1, got {self.batch_size}")
        if not math.isfinite(self.lr) or self.lr <= 0:
            raise ConfigError("lr", f"must be positive, got {self.lr}")
        if self.optimizer not in OPTIMIZERS:
            raise ConfigError("optimizer", f"unknown optimizer '{self.optimizer}'. Must be one of {list(OPTIMIZERS)}")
        if not 0.0 <= self.momentum < 1.0:
            raise ConfigError("momentum", f"must be in [0, 1), got {self.momentum}")
        kind, _ = parse_baseline(self.baseline)
        if self.freeze_network and kind == "none" and self.effective_lambda == 0:
            raise ConfigError("freeze-network", "needs the variance term (loss shannon+var, lambda > 0) or a centroid baseline")
        for name, value in (("train-limit", self.train_limit), ("test-limit", self.test_limit)):
            if value is not None and value < 1:
                raise ConfigError(name, f"must be positive, got {value}")
        if self.dtype not in DTYPES:
            raise ConfigError("dtype", f"unknown dtype '{self.dtype}'. Must be one of {list(DTYPES)}")
        if self.num_classes < 2:
            raise ConfigError("classes", f"need at least 2 classes, got {self.num_classes}")
        return self

    @property
    def effective_lambda(self) -> float:
        return 0.0 if self.loss == "shannon" else self.lam

    @property
    def baseline_kind(self) -> str:
        return parse_baseline(self.baseline)[0]

    @property
    def baseline_alpha(self) -> float:
        return parse_baseline(self.baseline)[1]

    def arch_text(self) -> str:
        return preset_text(self.arch) if self.arch in PRESETS else Path(self.arch).read_text(encoding="utf-8")

    def arch_graph(self) -> ArchGraph:
        return load_preset(self.arch) if self.arch in PRESETS else parse(self.arch_text(), name=Path(self.arch).stem)

    def replace(self, **changes) -> "TrainConfig":
        return dataclasses.replace(self, **changes)

    def to_mapping(self) -> Dict[str, str]:
        """Field values as strings; ``from_mapping`` inverts it exactly."""
        out = {}
        for f in dataclasses.fields(self):
            value = getattr(self, f.name)
            if value is None:
                out[f.name] = ""
            elif isinstance(value, bool):
                out[f.name] = "true" if value else "false"
            elif isinstance(value, float):
                out[f.name] = repr(value)
            else:
                out[f.name] = str(value)
        return out

    @classmethod
    def from_mapping(cls, mapping: Mapping[str, str]) -> "TrainConfig":
        """Rebuild a config from ``to_mapping`` output; unknown keys are rejected."""
        known = {f.name: f for f in dataclasses.fields(cls)}
        unknown = sorted(set(mapping) - set(known))
        if unknown:
            raise ConfigError("config-from", f"unknown config keys {unknown}")
        defaults = cls()
        values = {}
        for name, raw in mapping.items():
            default = getattr(defaults, name)
            try:
                if raw == "" and name in ("train_limit", "test_limit"):
                    values[name] = None
                elif isinstance(default, bool):
                    if raw not in ("true", "false"):
                        raise ValueError(raw)
                    values[name] = raw == "true"
                elif isinstance(default, float):
                    values[name] = float(raw)
                elif isinstance(default, int) or name in ("train_limit", "test_limit"):
                    values[name] = int(raw)
                else:
                    values[name] = raw
            except ValueError:
                raise ConfigError("config-from", f"bad value '{raw}' for {name}") from None
        return cls(**values)


__all__ = ["TrainConfig", "LOSSES", "OPTIMIZERS", "BASELINES", "parse_baseline"]
