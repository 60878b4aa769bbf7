"""Two-component PCA backed by a cyclic Jacobi eigen-solver."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

import numpy as np

JACOBI_TOL = 1e-12
MAX_SWEEPS = 100


def jacobi_eigh(matrix: np.ndarray, tol: float = JACOBI_TOL, max_sweeps: int = MAX_SWEEPS) -> Tuple[np.ndarray, np.ndarray]:
    """Eigen-decompose a symmetric matrix by cyclic Jacobi rotations.

    Args:
        matrix: Symmetric ``[N, N]`` array.
        tol: Stop once the off-diagonal Frobenius norm is below ``tol`` times the matrix norm.
        max_sweeps: Upper bound on full sweeps over all ``(p, q)`` pairs.

    Returns:
        ``(eigenvalues, eigenvectors)`` with eigenvalues descending and eigenvectors as
        columns, each signed so that its first non-negligible component is positive.
    """
    a = np.array(matrix, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if not np.allclose(a, a.T, atol=1e-12 * max(1.0, np.abs(a).max(initial=0.0))):
        raise ValueError("matrix is not symmetric")
    a = 0.5 * (a + a.T)
    n = a.shape[0]
    v = np.eye(n)
    scale = max(np.linalg.norm(a), np.finfo(float).tiny)

    for _ in range(max_sweeps):
        off = np.sqrt(max(np.sum(a * a) - np.sum(np.diag(a) ** 2), 0.0))
        if off <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = 1.0 / (abs(theta) + np.sqrt(theta * theta + 1.0))
                if theta < 0.0:
                    t = -t
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                col_p, col_q = a[:, p].copy(), a[:, q].copy()
                a[:, p] = c * col_p - s * col_q
                a[:, q] = s * col_p + c * col_q
                row_p, row_q = a[p, :].copy(), a[q, :].copy()
                a[p, :] = c * row_p - s * row_q
                a[q, :] = s * row_p + c * row_q
                a[p, q] = a[q, p] = 0.0
                vec_p, vec_q = v[:, p].copy(), v[:, q].copy()
                v[:, p] = c * vec_p - s * vec_q
                v[:, q] = s * vec_p + c * vec_q

    values = np.diag(a).copy()
    order = np.argsort(-values, kind="stable")
    values, v = values[order], v[:, order]
    for j in range(n):
        nonzero = np.flatnonzero(np.abs(v[:, j]) > 1e-12)
        if nonzero.size and v[nonzero[0], j] < 0:
            v[:, j] = -v[:, j]
    return values, v


@dataclass
class PcaResult:
    """Projection of points onto their two leading principal axes."""

    projected: np.ndarray
    components: np.ndarray
    eigenvalues: np.ndarray
    mean: np.ndarray

    def transform(self, points: np.ndarray) -> np.ndarray:
        return (np.asarray(points, dtype=np.float64) - self.mean) @ self.components.T


def pca2(points: np.ndarray) -> PcaResult:
    """Center the points, diagonalise their covariance and project onto the top two axes.

    Raises:
        ValueError: For fewer than two points, fewer than two dimensions or rank-0 data.
    """
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[0] < 2 or pts.shape[1] < 2:
        raise ValueError(f"pca2 needs at least 2 points of dimension >= 2, got shape {pts.shape}")
    mean = pts.mean(axis=0)
    centered = pts - mean
    cov = centered.T @ centered / pts.shape[0]
    values, vectors = jacobi_eigh(cov)
    if values[0] <= JACOBI_TOL * max(1.0, float(np.abs(pts).max())):
        raise ValueError("points are identical; no principal direction exists")
    components = vectors[:, :2].T
    return PcaResult(projected=centered @ components.T, components=components, eigenvalues=np.maximum(values[:2], 0.0), mean=mean)


__all__ = ["JACOBI_TOL", "jacobi_eigh", "PcaResult", "pca2"]
