"""Runtime settings and ``.env`` loading."""

from .env_loader import find_env_file, load_env, parse_env_file
from .settings import DTYPES, LOG_LEVELS, HclossSettings

__all__ = ["HclossSettings", "LOG_LEVELS", "DTYPES", "load_env", "parse_env_file", "find_env_file"]
