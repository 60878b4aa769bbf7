"""hcloss - intra-class variance training with a Hadamard centroid layer."""

from ._version import __version__

__all__ = ["__version__"]
