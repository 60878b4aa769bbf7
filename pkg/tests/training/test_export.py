"""Unit tests for the CSV exports."""

import csv

import numpy as np
import pytest

from hcloss.training import export_centroid_snapshots, export_embeddings, train


def read_rows(path):
    with path.open(newline="", encoding="utf-8") as handle:
        return list(csv.reader(handle))


def test_embeddings_then_centroids(tiny_config, tiny_train, tiny_test, tmp_path):
    """Test that sample rows are followed by one row per centroid."""
    result = train(tiny_config.replace(epochs=1), tiny_train)
    written = export_embeddings(result.network, tiny_test, tmp_path / "emb.csv")

    assert written == [tmp_path / "emb.csv"]
    rows = read_rows(written[0])
    assert rows[0] == ["index", "label", "e_1", "e_2"]
    assert len(rows) == 1 + len(tiny_test) + 3
    assert [r[0] for r in rows[-3:]] == ["centroid"] * 3
    assert [int(r[1]) for r in rows[-3:]] == [0, 1, 2]
    np.testing.assert_allclose([float(v) for v in rows[-1][2:]], result.bank.column(2))


def test_wide_embeddings_add_pca_file(tiny_config, tiny_train, tiny_test, tmp_path):
    """Test that embeddings wider than 2 also get a PCA projection file."""
    result = train(tiny_config.replace(epochs=1, embed_dim=3), tiny_train)
    written = export_embeddings(result.network, tiny_test, tmp_path / "emb.csv")

    assert written[1] == tmp_path / "emb.pca2.csv"
    rows = read_rows(written[1])
    assert rows[0] == ["index", "label", "p_1", "p_2"]
    assert len(rows) == 1 + len(tiny_test) + 3
    assert len(read_rows(written[0])[0]) == 5


def test_centroid_snapshots(tmp_path):
    """Test the per-epoch centroid trajectory layout."""
    snapshots = [np.zeros((2, 3)), np.ones((2, 3))]
    rows = read_rows(export_centroid_snapshots(snapshots, tmp_path / "c.csv"))
    assert rows[0] == ["epoch", "k", "c_1", "c_2"]
    assert len(rows) == 1 + 2 * 3
    assert rows[-1] == ["2", "2", "1.0", "1.0"]


def test_no_snapshots(tmp_path):
    """Test that an empty trajectory is rejected."""
    with pytest.raises(ValueError):
        export_centroid_snapshots([], tmp_path / "c.csv")
