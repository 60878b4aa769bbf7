"""Load a local ``.env`` file into the process environment."""

from __future__ import annotations

import os
from pathlib import Path
from typing import Dict, Optional

from dotenv import dotenv_values
from loguru import logger


def parse_env_file(path: Path) -> Dict[str, str]:
    """Parse a .env file into a dictionary; keys without a value are skipped.

    Args:
        path: Path to the .env file

    Returns:
        Dictionary of environment variables
    """
    if not path.exists():
        return {}
    try:
        return {k: v for k, v in dotenv_values(path).items() if v is not None}
    except (OSError, UnicodeDecodeError) as e:
        logger.error(f"Error parsing .env file at {path}: {e}")
        return {}


def find_env_file(start: Optional[Path] = None) -> Optional[Path]:
    """Return the nearest ``.env`` in ``start`` or one of its parents."""
    start = start or Path.cwd()
    for directory in (start, *start.parents):
        candidate = directory / ".env"
        if candidate.is_file():
            return candidate
    return None


def load_env(path: Optional[Path] = None, search_parents: bool = True) -> int:
    """Copy variables from ``.env`` into ``os.environ`` without overwriting existing keys.

    Args:
        path: Optional path to the .env file. Defaults to .env in the working directory.
        search_parents: If True and path is None, search parent directories as well.

    Returns:
        Number of variables that were added.
    """
    if path is None:
        path = find_env_file() if search_parents else Path.cwd() / ".env"
    if path is None or not path.exists():
        logger.debug(f"No .env file found at {path or Path.cwd()}")
        return 0

    loaded = 0
    for key, value in parse_env_file(path).items():
        if key not in os.environ:
            os.environ[key] = value
            loaded += 1
    if loaded:
        logger.debug(f"Loaded {loaded} environment variables from {path}")
    return loaded
