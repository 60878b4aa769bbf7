"""Exception hierarchy shared across hcloss modules."""

from __future__ import annotations

from typing import Optional


class HclossError(Exception):
    """Base class for all hcloss errors."""

    pass


class ShapeError(HclossError, ValueError):
    """Raised when tensor or layer shapes do not line up."""

    def __init__(self, message: str, layer: Optional[int] = None):
        if layer is not None:
            message = f"layer {layer}: {message}"
        super().__init__(message)
        self.layer = layer


class NumericalError(HclossError, ArithmeticError):
    """Raised when a computation leaves the finite reals."""

    pass


class NonFiniteError(NumericalError):
    """Raised when NaN or Inf shows up in values or gradients."""

    pass


class ZeroNormError(NumericalError):
    """Raised when a vector is too short to be normalised."""

    def __init__(self, message: str, sample: Optional[int] = None):
        super().__init__(message)
        self.sample = sample


class DivergenceError(NumericalError):
    """Raised when training produces a non-finite loss."""

    def __init__(self, message: str, epoch: int, batch: int):
        super().__init__(f"epoch {epoch}, batch {batch}: {message}")
        self.epoch = epoch
        self.batch = batch


class DistributionError(HclossError, ValueError):
    """Raised when a vector is not a usable probability distribution."""

    pass


class ArchParseError(HclossError, ValueError):
    """Raised when architecture text cannot be parsed.

    Attributes:
        line: 1-based line of the offending clause.
        column: 1-based column of the offending clause.
    """

    category = "parse error"

    def __init__(self, message: str, line: int = 0, column: int = 0):
        super().__init__(f"{line}:{column}: {self.category}: {message}")
        self.detail = message
        self.line = line
        self.column = column


class UnknownLayerError(ArchParseError):
    category = "unknown layer kind"


class MalformedAttributeError(ArchParseError):
    category = "malformed attribute"


class DuplicateLabelError(ArchParseError):
    category = "duplicate label"


class UnresolvedReferenceError(ArchParseError):
    category = "unresolved reference"


class UnknownOptionError(ArchParseError):
    category = "unknown option"


class ParseOnlyLayerError(HclossError, NotImplementedError):
    """Raised when a layer can be parsed and shape-checked but not executed."""

    pass


class DataFormatError(HclossError, ValueError):
    """Raised when a dataset file is not a valid IDX container."""

    pass


class BadMagicError(DataFormatError):
    pass


class TruncatedPayloadError(DataFormatError):
    pass


class CountMismatchError(DataFormatError):
    pass


class ConfigError(HclossError, ValueError):
    """Raised for invalid configuration values.

    Attributes:
        field: Name of the offending setting, spelled as its CLI flag.
    """

    def __init__(self, field: str, message: str):
        super().__init__(f"--{field}: {message}")
        self.field = field
