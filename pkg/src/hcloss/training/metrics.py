"""Run metrics and their text serialisation.

The document is a block of ``key = value`` lines followed by a CSV table::

    # hcloss run metrics
    format = 1
    config.dataset = mnist
    ...
    data.pixel_scaling = bytes/255, no mean subtraction
    result.nearest_centroid_accuracy = 0.9721
    ...
    [epochs]
    epoch,batches,l0,l_var,total,var_w,trace_rw
    1,40,0.51,3.2,0.67,,

Floats are written with ``repr`` and nothing time-dependent is recorded, so two
identical runs produce byte-identical files.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Union

from ..errors import ConfigError
from .config import TrainConfig
from .trainer import EpochRecord

FORMAT_VERSION = 1
PIXEL_SCALING = "bytes/255, no mean subtraction"
_EPOCH_COLUMNS = ("epoch", "batches", "l0", "l_var", "total", "var_w", "trace_rw")


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _floats(values: Optional[List[float]]) -> str:
    return "" if values is None else ",".join(repr(float(v)) for v in values)


def _opt_float(raw: str) -> Optional[float]:
    return float(raw) if raw != "" else None


@dataclass
class RunMetrics:
    """Outcome of one training run together with the config that produced it."""

    config: TrainConfig
    history: List[EpochRecord] = field(default_factory=list)
    nearest_centroid_accuracy: Optional[float] = None
    max_score_accuracy: Optional[float] = None
    learned_centroid_accuracy: Optional[float] = None
    centroid_distance: Optional[List[float]] = None
    initial_centroid_distance: Optional[List[float]] = None
    train_size: Optional[int] = None
    test_size: Optional[int] = None

    def to_text(self) -> str:
        lines = ["# hcloss run metrics", f"format = {FORMAT_VERSION}"]
        lines += [f"config.{k} = {v}" for k, v in self.config.to_mapping().items()]
        lines += [
            f"data.pixel_scaling = {PIXEL_SCALING}",
            f"data.train_size = {_fmt(self.train_size)}",
            f"data.test_size = {_fmt(self.test_size)}",
            f"result.nearest_centroid_accuracy = {_fmt(self.nearest_centroid_accuracy)}",
            f"result.max_score_accuracy = {_fmt(self.max_score_accuracy)}",
            f"result.learned_centroid_accuracy = {_fmt(self.learned_centroid_accuracy)}",
            f"result.centroid_distance = {_floats(self.centroid_distance)}",
            f"result.initial_centroid_distance = {_floats(self.initial_centroid_distance)}",
            "",
            "[epochs]",
            ",".join(_EPOCH_COLUMNS),
        ]
        for r in self.history:
            lines.append(",".join(_fmt(v) for v in (r.epoch, r.batches, r.l0, r.l_var, r.total, r.var_w, r.trace_rw)))
        return "\n".join(lines) + "\n"

    def write(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.to_text(), encoding="utf-8")
        return path

    @classmethod
    def from_text(cls, text: str) -> "RunMetrics":
        """Parse ``to_text`` output.

        Raises:
            ConfigError: If the document is malformed or carries an invalid config.
        """
        head, sep, table = text.partition("[epochs]")
        if not sep:
            raise ConfigError("config-from", "metrics file has no [epochs] table")
        values: Dict[str, str] = {}
        for line in head.splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, eq, value = line.partition(" = ")
            if not eq:
                key, value = line.rstrip(" =").rstrip(), ""
            values[key.strip()] = value
        if values.get("format") != str(FORMAT_VERSION):
            raise ConfigError("config-from", f"unsupported metrics format {values.get('format')!r}")
        config = TrainConfig.from_mapping({k[len("config.") :]: v for k, v in values.items() if k.startswith("config.")})

        rows = [r for r in table.strip().splitlines()[1:] if r.strip()]
        history = []
        for row in rows:
            epoch, batches, l0, l_var, total, var_w, trace_rw = row.split(",")
            history.append(EpochRecord(int(epoch), float(l0), float(l_var), float(total), int(batches), _opt_float(var_w), _opt_float(trace_rw)))

        def floats(key):
            raw = values.get(key, "")
            return [float(v) for v in raw.split(",")] if raw else None

        def number(key, kind=float):
            raw = values.get(key, "")
            return kind(raw) if raw else None

        return cls(
            config=config,
            history=history,
            nearest_centroid_accuracy=number("result.nearest_centroid_accuracy"),
            max_score_accuracy=number("result.max_score_accuracy"),
            learned_centroid_accuracy=number("result.learned_centroid_accuracy"),
            centroid_distance=floats("result.centroid_distance"),
            initial_centroid_distance=floats("result.initial_centroid_distance"),
            train_size=number("data.train_size", int),
            test_size=number("data.test_size", int),
        )

    @classmethod
    def read(cls, path: Union[str, Path]) -> "RunMetrics":
        return cls.from_text(Path(path).read_text(encoding="utf-8"))


__all__ = ["RunMetrics", "FORMAT_VERSION", "PIXEL_SCALING"]
