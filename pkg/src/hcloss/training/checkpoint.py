"""Versioned binary checkpoints of a trained network.

Layout, integers little-endian::

    b"HCLK"  u32 version  u32 manifest length  manifest (UTF-8 JSON)
    then per parameter, in manifest order:
    u32 name length  name  u64 byte length  raw little-endian array bytes

The manifest holds the training config, the canonical architecture text, the
input extent and each parameter's name, shape and dtype.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path
from typing import Tuple, Union

import numpy as np
from loguru import logger

from ..arch import Network, build, parse
from ..errors import BadMagicError, DataFormatError, TruncatedPayloadError
from .config import TrainConfig

MAGIC = b"HCLK"
VERSION = 1


def save_checkpoint(path: Union[str, Path], network: Network, config: TrainConfig) -> Path:
    """Write ``network`` and the config that trained it to ``path``."""
    path = Path(path)
    state = network.state_dict()
    manifest = {
        "config": config.to_mapping(),
        "arch": network.arch_text,
        "input_extent": int(network.input_shape[1]),
        "num_classes": config.num_classes,
        "parameters": [{"name": name, "shape": list(value.shape), "dtype": value.dtype.str.lstrip("<>=|")} for name, value in state.items()],
    }
    blob = json.dumps(manifest, sort_keys=True).encode("utf-8")
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("wb") as handle:
        handle.write(MAGIC + struct.pack("<II", VERSION, len(blob)) + blob)
        for name, value in state.items():
            raw = np.ascontiguousarray(value).astype(value.dtype.newbyteorder("<"), copy=False).tobytes()
            encoded = name.encode("utf-8")
            handle.write(struct.pack("<I", len(encoded)) + encoded + struct.pack("<Q", len(raw)) + raw)
    logger.info(f"Saved checkpoint with {len(state)} parameters to {path}")
    return path


class _Reader:
    def __init__(self, raw: bytes, source: str):
        self.raw, self.pos, self.source = raw, 0, source

    def take(self, count: int) -> bytes:
        if self.pos + count > len(self.raw):
            raise TruncatedPayloadError(f"{self.source}: checkpoint ends after {len(self.raw)} bytes, expected at least {self.pos + count}")
        chunk = self.raw[self.pos : self.pos + count]
        self.pos += count
        return chunk

    def unpack(self, fmt: str):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))


def load_checkpoint(path: Union[str, Path]) -> Tuple[Network, TrainConfig]:
    """Rebuild the network saved by ``save_checkpoint``.

    Raises:
        BadMagicError: If the file is not a checkpoint.
        TruncatedPayloadError: If the file is cut short.
        DataFormatError: On an unknown version or a manifest that does not match the records.
    """
    path = Path(path)
    reader = _Reader(path.read_bytes(), str(path))
    if reader.take(4) != MAGIC:
        raise BadMagicError(f"{path}: not an hcloss checkpoint")
    version, length = reader.unpack("<II")
    if version != VERSION:
        raise DataFormatError(f"{path}: unsupported checkpoint version {version}")
    try:
        manifest = json.loads(reader.take(length).decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise DataFormatError(f"{path}: unreadable manifest ({e})") from e

    config = TrainConfig.from_mapping(manifest["config"])
    state = {}
    for entry in manifest["parameters"]:
        (name_len,) = reader.unpack("<I")
        name = reader.take(name_len).decode("utf-8")
        if name != entry["name"]:
            raise DataFormatError(f"{path}: record '{name}' where manifest expects '{entry['name']}'")
        (size,) = reader.unpack("<Q")
        dtype = np.dtype(entry["dtype"]).newbyteorder("<")
        expected = int(np.prod(entry["shape"], dtype=np.int64)) * dtype.itemsize
        if size != expected:
            raise DataFormatError(f"{path}: parameter '{name}' has {size} bytes, shape {entry['shape']} needs {expected}")
        state[name] = np.frombuffer(reader.take(size), dtype=dtype).reshape(entry["shape"]).astype(dtype.newbyteorder("="))

    graph = parse(manifest["arch"])
    network = build(
        graph,
        config.seed,
        input_extent=manifest["input_extent"],
        n=config.embed_dim,
        num_classes=manifest["num_classes"],
        normalize=config.normalize,
        dtype=np.dtype(config.dtype),
    )
    if network.bank is None and len(state) > len(network.params):
        network.ensure_bank()
    network.load_state_dict(state)
    logger.debug(f"Loaded {network!r} from {path}")
    return network, config


__all__ = ["save_checkpoint", "load_checkpoint", "MAGIC", "VERSION"]
