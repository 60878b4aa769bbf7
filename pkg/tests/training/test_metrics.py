"""Unit tests for the run metrics text format."""

import pytest

from hcloss.errors import ConfigError
from hcloss.training import EpochRecord, RunMetrics, TrainConfig


@pytest.fixture
def metrics():
    return RunMetrics(
        config=TrainConfig(lam=0.05, seed=7, train_limit=1000),
        history=[EpochRecord(1, 0.9, 3.25, 1.0625, 4), EpochRecord(2, 0.1 + 0.2, 1.5, 0.375, 4, var_w=1.25, trace_rw=1.2500000000000002)],
        nearest_centroid_accuracy=0.9721,
        max_score_accuracy=0.97,
        learned_centroid_accuracy=0.5,
        centroid_distance=[0.1, 0.2],
        initial_centroid_distance=[1.0, 2.0],
        train_size=1000,
        test_size=500,
    )


def test_round_trip(metrics):
    """Test that metrics survive a text round trip."""
    assert RunMetrics.from_text(metrics.to_text()) == metrics


def test_write_and_read(metrics, tmp_path):
    """Test writing to a new directory and reading back."""
    path = metrics.write(tmp_path / "run" / "metrics.txt")
    assert RunMetrics.read(path) == metrics


def test_layout(metrics):
    """Test the key = value header and the epochs CSV table."""
    text = metrics.to_text()
    lines = text.splitlines()
    assert lines[:2] == ["# hcloss run metrics", "format = 1"]
    assert "config.lam = 0.05" in lines
    assert "config.test_limit = " in lines
    assert "data.pixel_scaling = bytes/255, no mean subtraction" in lines
    assert "result.centroid_distance = 0.1,0.2" in lines
    header = lines.index("[epochs]")
    assert lines[header + 1] == "epoch,batches,l0,l_var,total,var_w,trace_rw"
    assert lines[header + 2] == "1,4,0.9,3.25,1.0625,,"
    assert lines[header + 3].startswith("2,4,0.30000000000000004,")


def test_identical_metrics_identical_bytes(metrics):
    """Test that equal metrics render to identical bytes."""
    assert metrics.to_text() == RunMetrics.from_text(metrics.to_text()).to_text()


def test_missing_results_stay_empty():
    """Test that unset results read back as None."""
    text = RunMetrics(config=TrainConfig()).to_text()
    parsed = RunMetrics.from_text(text)
    assert parsed.nearest_centroid_accuracy is None
    assert parsed.centroid_distance is None
    assert parsed.history == []


def test_requires_epochs_table():
    """Test that a file without an epochs table is rejected."""
    with pytest.raises(ConfigError, match="--config-from"):
        RunMetrics.from_text("format = 1\n")


def test_rejects_other_format():
    """Test that an unknown format number is rejected."""
    with pytest.raises(ConfigError, match="unsupported metrics format"):
        RunMetrics.from_text("format = 2\n[epochs]\nepoch\n")
