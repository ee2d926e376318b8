"""
TWC1 binary storage for built graphs.

Layout (little-endian):
- magic ``TWC1`` (4 bytes), version (1 byte), policy code (1 byte),
  n (1 byte), master seed (8 bytes)
- for k = 2..n, for each stored copy in ascending index: 2^(k-1) forward
  entries as uint32

Inverse tables are rebuilt on load. The identity policy stores no tables.
"""

import logging
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import List, Union

import numpy as np

from .core import (
    MAX_DIMENSION,
    TABLE_DTYPE,
    CouplingPolicy,
    MatchingLevel,
    TwistedCube,
)
from .errors import GraphFormatError
from .utils import ensure_parent_dir

logger = logging.getLogger(__name__)

MAGIC = b'TWC1'
VERSION = 1
HEADER = struct.Struct('<4sBBBQ')


@dataclass(frozen=True)
class GraphHeader:
    """Fixed-size prefix of a TWC1 stream."""

    version: int
    policy: CouplingPolicy
    n: int
    seed: int

    def to_dict(self) -> dict:
        return {
            'version': self.version,
            'policy': self.policy.value,
            'n': self.n,
            'seed': self.seed,
        }


def serialize(G: TwistedCube) -> bytes:
    """Encode a graph as a TWC1 byte string."""
    parts = [HEADER.pack(MAGIC, VERSION, G.policy.code, G.n, G.seed)]
    for lvl in G.levels:
        parts.append(lvl.forward.astype(TABLE_DTYPE, copy=False).tobytes(order='C'))
    return b''.join(parts)


def read_header(data: bytes) -> GraphHeader:
    """Decode and check the header without touching the tables."""
    if len(data) < HEADER.size:
        raise GraphFormatError(
            f"truncated stream: {len(data)} bytes, header alone needs {HEADER.size}"
        )

    magic, version, policy_code, n, seed = HEADER.unpack_from(data)
    if magic != MAGIC:
        raise GraphFormatError(f"bad magic {magic!r}, expected {MAGIC!r}")
    if version != VERSION:
        raise GraphFormatError(f"unsupported version {version}, expected {VERSION}")
    try:
        policy = CouplingPolicy.from_code(policy_code)
    except ValueError as e:
        raise GraphFormatError(str(e))
    if not 1 <= n <= MAX_DIMENSION:
        raise GraphFormatError(f"dimension out of range in header: n = {n}")

    return GraphHeader(version=version, policy=policy, n=n, seed=seed)


def expected_size(policy: CouplingPolicy, n: int) -> int:
    """Total stream length for a graph of this shape."""
    entries = sum(policy.stored_copies(n, k) << (k - 1) for k in range(2, n + 1))
    return HEADER.size + entries * TABLE_DTYPE.itemsize


def deserialize(data: bytes) -> TwistedCube:
    """
    Decode a TWC1 stream.

    Validates magic, version, exact length and that every stored table is a
    bijection before rebuilding the inverse tables.
    """
    header = read_header(data)
    size = expected_size(header.policy, header.n)
    if len(data) < size:
        raise GraphFormatError(f"truncated stream: {len(data)} bytes, expected {size}")
    if len(data) > size:
        raise GraphFormatError(f"trailing data: {len(data)} bytes, expected {size}")

    levels: List[MatchingLevel] = []
    offset = HEADER.size
    for k in range(2, header.n + 1):
        rows = header.policy.stored_copies(header.n, k)
        if rows == 0:
            continue
        half = 1 << (k - 1)
        forward = np.frombuffer(data, dtype=TABLE_DTYPE, count=rows * half, offset=offset)
        offset += forward.nbytes
        try:
            levels.append(MatchingLevel.from_forward(k, forward.reshape(rows, half)))
        except ValueError as e:
            raise GraphFormatError(str(e))

    return TwistedCube(n=header.n, policy=header.policy, seed=header.seed, levels=tuple(levels))


def save_graph(path: Union[str, Path], G: TwistedCube) -> int:
    """Write G to path; returns the number of bytes written."""
    path = ensure_parent_dir(Path(path))
    data = serialize(G)
    try:
        path.write_bytes(data)
    except OSError as e:
        raise GraphFormatError(f"cannot write {path}: {e.strerror or e}")
    logger.debug("wrote %s (%d bytes)", path, len(data))
    return len(data)


def load_graph(path: Union[str, Path]) -> TwistedCube:
    """Read and validate a TWC1 file."""
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as e:
        raise GraphFormatError(f"cannot read {path}: {e.strerror or e}")
    return deserialize(data)
