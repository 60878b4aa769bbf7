"""CSV export of embeddings and centroids for external plotting."""

from __future__ import annotations

import csv
from pathlib import Path
from typing import List, Optional, Sequence, Union

import numpy as np
from loguru import logger

from ..arch import Network
from ..data import LabeledDataset
from ..stats import pca2
from .evaluation import Embeddings, compute_embeddings


def _row(*values) -> List[str]:
    return [repr(float(v)) if isinstance(v, (float, np.floating)) else str(v) for v in values]


def _write(path: Path, header: Sequence[str], rows) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def export_embeddings(network: Network, dataset: LabeledDataset, path: Union[str, Path], embeddings: Optional[Embeddings] = None) -> List[Path]:
    """Write ``index,label,e_1..e_n`` rows followed by ``centroid,k,c_1..c_n`` rows.

    For ``n > 2`` a second file ``<stem>.pca2.csv`` holds the same rows projected on
    the two leading principal axes of the embeddings.

    Returns:
        Paths of the files written.
    """
    path = Path(path)
    embeddings = compute_embeddings(network, dataset) if embeddings is None else embeddings
    points = embeddings.points
    n = points.shape[1]
    centroids = network.bank.matrix.T.astype(np.float64) if network.bank is not None else np.zeros((0, n))

    def rows(pts: np.ndarray, cents: np.ndarray):
        for i, (label, vector) in enumerate(zip(embeddings.labels, pts)):
            yield _row(i, int(label), *vector)
        for k, vector in enumerate(cents):
            yield _row("centroid", k, *vector)

    header = ["index", "label"] + [f"e_{j}" for j in range(1, n + 1)]
    _write(path, header, rows(points, centroids))
    written = [path]
    if n > 2:
        projection = pca2(points)
        pca_path = path.with_name(f"{path.stem}.pca2.csv")
        _write(pca_path, ["index", "label", "p_1", "p_2"], rows(projection.projected, projection.transform(centroids) if len(centroids) else centroids[:, :2]))
        written.append(pca_path)
    logger.info(f"Exported {len(points)} embeddings to {', '.join(str(p) for p in written)}")
    return written


def export_centroid_snapshots(snapshots: Sequence[np.ndarray], path: Union[str, Path]) -> Path:
    """Write ``epoch,k,c_1..c_n`` rows, one per class per recorded epoch."""
    path = Path(path)
    if not snapshots:
        raise ValueError("no centroid snapshots to export")
    n = snapshots[0].shape[0]
    rows = (_row(epoch, k, *column) for epoch, matrix in enumerate(snapshots, start=1) for k, column in enumerate(np.asarray(matrix).T))
    _write(path, ["epoch", "k"] + [f"c_{j}" for j in range(1, n + 1)], rows)
    return path


__all__ = ["export_embeddings", "export_centroid_snapshots"]
