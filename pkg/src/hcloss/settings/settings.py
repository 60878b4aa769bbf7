"""Runtime settings shared by the CLI and the training code."""

from __future__ import annotations

import os
from pathlib import Path
from typing import Optional, Union

import numpy as np

from ..errors import ConfigError
from .env_loader import load_env

# Pick up a local .env file
load_env()

DEFAULT_DATA_ROOT = "./data"
DEFAULT_OUT_DIR = "./runs"
DEFAULT_LOG_LEVEL = "INFO"
DEFAULT_DTYPE = "float32"

LOG_LEVELS = ("TRACE", "DEBUG", "INFO", "SUCCESS", "WARNING", "ERROR", "CRITICAL")
DTYPES = ("float32", "float64")


class HclossSettings:
    """Paths, log level and floating point precision of a run.

    Explicit arguments win over the ``HCLOSS_*`` environment variables, which win
    over the defaults.
    """

    def __init__(
        self,
        data_root: Optional[Union[str, Path]] = None,
        out_dir: Optional[Union[str, Path]] = None,
        log_level: Optional[str] = None,
        dtype: Optional[str] = None,
    ):
        """Initialize settings.

        Args:
            data_root: Directory holding the IDX files. Falls back to HCLOSS_DATA_ROOT.
            out_dir: Directory for metrics, checkpoints and exports. Falls back to HCLOSS_OUT_DIR.
            log_level: loguru level name. Falls back to HCLOSS_LOG_LEVEL.
            dtype: Training precision, ``float32`` or ``float64``. Falls back to HCLOSS_DTYPE.
        """
        self.data_root = Path(data_root or os.getenv("HCLOSS_DATA_ROOT") or DEFAULT_DATA_ROOT)
        self.out_dir = Path(out_dir or os.getenv("HCLOSS_OUT_DIR") or DEFAULT_OUT_DIR)
        self.log_level = (log_level or os.getenv("HCLOSS_LOG_LEVEL") or DEFAULT_LOG_LEVEL).upper()
        self.dtype_name = dtype or os.getenv("HCLOSS_DTYPE") or DEFAULT_DTYPE

        if self.log_level not in LOG_LEVELS:
            raise ConfigError("log-level", f"invalid log level '{self.log_level}'. Must be one of {list(LOG_LEVELS)}")
        if self.dtype_name not in DTYPES:
            raise ConfigError("dtype", f"invalid dtype '{self.dtype_name}'. Must be one of {list(DTYPES)}")

    @property
    def dtype(self) -> np.dtype:
        return np.dtype(self.dtype_name)

    def __repr__(self) -> str:
        return f"HclossSettings(data_root={str(self.data_root)!r}, out_dir={str(self.out_dir)!r}, log_level={self.log_level!r}, dtype={self.dtype_name!r})"
