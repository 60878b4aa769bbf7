"""Class centroids housed in a Hadamard layer.

The layer multiplies a constant all-ones ``N x K`` tensor elementwise with its
parameter matrix ``C``. Its output is therefore ``C`` itself, but because ``C``
is an ordinary parameter on the tape the optimiser updates the centroids like
any other weight.
"""

from __future__ import annotations

from typing import Optional

import numpy as np

from ..engine import Tensor
from ..errors import ShapeError


class CentroidBank:
    """Matrix ``C`` of class centres, one column per class.

    Attributes:
        C: ``[N, K]`` parameter tensor (embedding dim x class count).
    """

    def __init__(self, matrix: np.ndarray, trainable: bool = True, name: str = "C"):
        matrix = np.asarray(matrix)
        if matrix.ndim != 2:
            raise ShapeError(f"centroid matrix must be N x K, got shape {matrix.shape}")
        self.C = Tensor(matrix, requires_grad=trainable, name=name)
        self._ones = np.ones(matrix.shape, dtype=self.C.dtype)

    @classmethod
    def zeros(cls, dim: int, num_classes: int, dtype: np.dtype = np.float64, trainable: bool = True) -> "CentroidBank":
        return cls(np.zeros((dim, num_classes), dtype=dtype), trainable=trainable)

    @property
    def dim(self) -> int:
        return self.C.shape[0]

    @property
    def num_classes(self) -> int:
        return self.C.shape[1]

    @property
    def trainable(self) -> bool:
        return self.C.requires_grad

    @trainable.setter
    def trainable(self, value: bool) -> None:
        self.C.requires_grad = value
        if not value:
            self.C.zero_grad()

    @property
    def matrix(self) -> np.ndarray:
        return self.C.data

    def column(self, k: int) -> np.ndarray:
        return self.C.data[:, k]

    def hadamard(self) -> Tensor:
        """Forward pass of the centroid layer: ``1 * C`` on the tape."""
        return Tensor(self._ones) * self.C

    def assign(self, matrix: np.ndarray, column: Optional[int] = None) -> None:
        """Overwrite all centroids, or one column, outside the tape."""
        if column is None:
            if matrix.shape != self.C.shape:
                raise ShapeError(f"expected centroid matrix {self.C.shape}, got {matrix.shape}")
            self.C.data[...] = matrix
        else:
            self.C.data[:, column] = matrix

    def __repr__(self) -> str:
        return f"CentroidBank(dim={self.dim}, num_classes={self.num_classes}, trainable={self.trainable})"


__all__ = ["CentroidBank"]
