"""Reader for IDX containers (the MNIST / Fashion-MNIST file format).

Layout, all integers big-endian::

    0000  u32   magic: 0x00000800 | (type code << 8) | number of dimensions
    0004  u32   extent of dimension 0
    ...         one u32 per dimension
    ....  u8    payload, row-major

Only unsigned-byte payloads (type code 0x08) occur in these datasets. Files may be
gzip-compressed; compression is detected from the content, not the file name.
"""

from __future__ import annotations

import gzip
import struct
from pathlib import Path
from typing import Tuple, Union

import numpy as np
from loguru import logger

from ..errors import BadMagicError, CountMismatchError, TruncatedPayloadError

IMAGES_MAGIC = 0x00000803
LABELS_MAGIC = 0x00000801
_GZIP_SIGNATURE = b"\x1f\x8b"

PathLike = Union[str, Path]


def read_bytes(path: PathLike) -> bytes:
    """Return the raw file content, inflating it when it is gzip data."""
    raw = Path(path).read_bytes()
    if raw[:2] == _GZIP_SIGNATURE:
        try:
            return gzip.decompress(raw)
        except (OSError, EOFError) as e:
            raise TruncatedPayloadError(f"{path}: corrupt gzip stream ({e})") from e
    return raw


def parse_idx(raw: bytes, expected_magic: int, source: str = "<bytes>") -> np.ndarray:
    """Decode an IDX byte string into a ``uint8`` array.

    Raises:
        BadMagicError: If the magic number is not ``expected_magic``.
        TruncatedPayloadError: If the header or payload is shorter than declared.
    """
    if len(raw) < 4:
        raise TruncatedPayloadError(f"{source}: file too short for an IDX header ({len(raw)} bytes)")
    (magic,) = struct.unpack(">I", raw[:4])
    if magic != expected_magic:
        raise BadMagicError(f"{source}: bad magic 0x{magic:08x}, expected 0x{expected_magic:08x}")
    ndim = magic & 0xFF
    header = 4 + 4 * ndim
    if len(raw) < header:
        raise TruncatedPayloadError(f"{source}: header declares {ndim} dimensions but the file ends at byte {len(raw)}")
    dims = struct.unpack(f">{ndim}I", raw[4:header])
    size = int(np.prod(dims, dtype=np.int64))
    if len(raw) - header < size:
        raise TruncatedPayloadError(f"{source}: payload has {len(raw) - header} bytes, dimensions {dims} need {size}")
    if len(raw) - header > size:
        logger.warning(f"{source}: ignoring {len(raw) - header - size} trailing bytes")
    return np.frombuffer(raw, dtype=np.uint8, count=size, offset=header).reshape(dims)


def read_idx_pair(images_path: PathLike, labels_path: PathLike) -> Tuple[np.ndarray, np.ndarray]:
    """Read an image file ``[M, H, W]`` and its label file ``[M]`` as raw bytes.

    Raises:
        CountMismatchError: If the files disagree on the number of items.
    """
    images = parse_idx(read_bytes(images_path), IMAGES_MAGIC, str(images_path))
    labels = parse_idx(read_bytes(labels_path), LABELS_MAGIC, str(labels_path))
    if images.shape[0] != labels.shape[0]:
        raise CountMismatchError(f"{images_path} holds {images.shape[0]} images but {labels_path} holds {labels.shape[0]} labels")
    return images, labels


def encode_idx(array: np.ndarray) -> bytes:
    """Serialise a ``uint8`` array of rank 1 or 3 as IDX bytes."""
    array = np.ascontiguousarray(array, dtype=np.uint8)
    magic = 0x00000800 | array.ndim
    return struct.pack(f">I{array.ndim}I", magic, *array.shape) + array.tobytes()


__all__ = ["IMAGES_MAGIC", "LABELS_MAGIC", "read_bytes", "parse_idx", "read_idx_pair", "encode_idx"]
