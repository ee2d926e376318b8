"""
Exceptions raised by twistcube.

Everything derives from ValueError so callers at the CLI boundary can keep a
single ``except ValueError`` branch, with the resource errors split out where
the exit code differs.
"""

from pathlib import Path
from typing import Union


class TwistCubeError(ValueError):
    """Base class for all twistcube errors."""


class DimensionError(TwistCubeError):
    """Dimension outside the supported range."""


class LevelError(TwistCubeError):
    """Matching level outside [1, n]."""


class VertexError(TwistCubeError):
    """Vertex label outside [0, 2^n)."""


class MemoryBudgetError(TwistCubeError):
    """Matching tables would not fit the memory budget."""

    def __init__(self, required: int, allowed: int):
        self.required = required
        self.allowed = allowed
        super().__init__(
            f"memory budget exceeded: tables need {required} bytes, budget allows {allowed} bytes"
        )


class GraphFormatError(TwistCubeError):
    """Malformed TWC1 stream."""


class DiameterCapError(TwistCubeError):
    """Exact diameter requested above the all-pairs cap."""

    def __init__(self, n: int, cap: int):
        self.n = n
        self.cap = cap
        super().__init__(
            f"exact diameter is capped at n <= {cap} (got n = {n}); use sampled bounds instead"
        )


class EnumerationBudgetError(TwistCubeError):
    """Injectivity enumeration larger than the allowed budget."""


class ConfigError(TwistCubeError):
    """Invalid sweep configuration."""


class EmitError(TwistCubeError):
    """Failed to write sweep results."""

    def __init__(self, path: Union[str, Path], reason: str):
        self.path = Path(path)
        super().__init__(f"cannot write {self.path}: {reason}")
