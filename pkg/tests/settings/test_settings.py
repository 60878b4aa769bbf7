"""Unit tests for runtime settings and .env loading."""

import os
from pathlib import Path
from unittest.mock import patch

import numpy as np
import pytest

from hcloss.errors import ConfigError
from hcloss.settings import HclossSettings, find_env_file, load_env, parse_env_file


class TestHclossSettings:
    """Tests for HclossSettings precedence."""

    def test_defaults(self):
        """Test the defaults with no HCLOSS_* variables set."""
        with patch.dict(os.environ, {}, clear=True):
            settings = HclossSettings()
        assert settings.data_root == Path("./data")
        assert settings.out_dir == Path("./runs")
        assert settings.log_level == "INFO"
        assert settings.dtype == np.float32

    def test_from_env_vars(self):
        """Test that HCLOSS_* variables are read and normalised."""
        env = {"HCLOSS_DATA_ROOT": "/srv/idx", "HCLOSS_LOG_LEVEL": "debug", "HCLOSS_DTYPE": "float64"}
        with patch.dict(os.environ, env, clear=True):
            settings = HclossSettings()
        assert settings.data_root == Path("/srv/idx")
        assert settings.log_level == "DEBUG"
        assert settings.dtype == np.float64

    def test_explicit_overrides_env(self):
        """Test that explicit arguments win over environment variables."""
        with patch.dict(os.environ, {"HCLOSS_OUT_DIR": "/env/out"}, clear=True):
            settings = HclossSettings(out_dir="/cli/out")
        assert settings.out_dir == Path("/cli/out")

    def test_invalid_log_level(self):
        """Test that an unknown log level names its flag."""
        with patch.dict(os.environ, {}, clear=True):
            with pytest.raises(ConfigError, match="--log-level"):
                HclossSettings(log_level="chatty")

    def test_invalid_dtype(self):
        """Test that an unsupported dtype from the environment names its flag."""
        with patch.dict(os.environ, {"HCLOSS_DTYPE": "float16"}, clear=True):
            with pytest.raises(ConfigError, match="--dtype"):
                HclossSettings()

    def test_repr(self):
        """Test that the repr shows the dtype."""
        with patch.dict(os.environ, {}, clear=True):
            assert "float32" in repr(HclossSettings())


class TestEnvLoader:
    """Tests for .env discovery and loading."""

    def test_parse_skips_bare_keys(self, tmp_path):
        """Test that comments, export prefixes and quotes are handled and bare keys skipped."""
        path = tmp_path / ".env"
        path.write_text("# comment\nHCLOSS_DATA_ROOT=/data\nexport HCLOSS_DTYPE='float64'\nBARE\n", encoding="utf-8")
        assert parse_env_file(path) == {"HCLOSS_DATA_ROOT": "/data", "HCLOSS_DTYPE": "float64"}

    def test_parse_missing_file(self, tmp_path):
        """Test that a missing file parses to nothing."""
        assert parse_env_file(tmp_path / ".env") == {}

    def test_load_does_not_override(self, tmp_path):
        """Test that variables already set are not overridden."""
        path = tmp_path / ".env"
        path.write_text("HCLOSS_OUT_DIR=/from/file\nHCLOSS_LOG_LEVEL=WARNING\n", encoding="utf-8")
        with patch.dict(os.environ, {"HCLOSS_OUT_DIR": "/already/set"}, clear=True):
            assert load_env(path) == 1
            assert os.environ["HCLOSS_OUT_DIR"] == "/already/set"
            assert os.environ["HCLOSS_LOG_LEVEL"] == "WARNING"

    def test_find_in_parent(self, tmp_path):
        """Test that a .env file is found in a parent directory."""
        (tmp_path / ".env").write_text("A=1\n", encoding="utf-8")
        nested = tmp_path / "a" / "b"
        nested.mkdir(parents=True)
        assert find_env_file(nested) == tmp_path / ".env"

    def test_no_file(self, tmp_path):
        """Test that loading a missing file sets nothing."""
        assert load_env(tmp_path / "missing.env") == 0
