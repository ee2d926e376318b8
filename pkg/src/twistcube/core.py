"""
Vertex-label arithmetic and seeded construction of twisted hypercubes.

Labels are n-bit integers: coordinate k lives in bit k-1, so coordinate n is
the most significant bit. The copy of G_k containing v is identified by
``v >> k`` (its coordinates above k), and the level-k matching of that copy
pairs ``(copy, 0, x)`` with ``(copy, 1, forward[x])``.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Tuple, Union

import numpy as np

from .errors import DimensionError, LevelError, MemoryBudgetError, VertexError
from .utils import memory_budget, resolve_threads

logger = logging.getLogger(__name__)

MAX_DIMENSION = 30
MAX_SEED = 2 ** 64 - 1
TABLE_DTYPE = np.dtype('<u4')
TABLE_ENTRY_BYTES = TABLE_DTYPE.itemsize
# Copies of one level are shuffled in blocks of at most this many entries, each
# block drawing from its own stream, so the work split never depends on threads.
BLOCK_ENTRIES = 1 << 16

IntOrArray = Union[int, np.ndarray]


class CouplingPolicy(str, Enum):
    """Joint distribution of the copies of G_k inside G_n."""

    INDEPENDENT = 'independent'
    DUPLICUBE = 'duplicube'
    IDENTITY = 'identity'

    @property
    def code(self) -> int:
        return _POLICY_CODES[self]

    @classmethod
    def from_code(cls, code: int) -> 'CouplingPolicy':
        for policy, value in _POLICY_CODES.items():
            if value == code:
                return policy
        raise ValueError(f"Unknown policy code {code}")

    def stored_copies(self, n: int, k: int) -> int:
        """Number of distinct level-k matchings kept for a graph of dimension n."""
        if self is CouplingPolicy.IDENTITY or k < 2:
            return 0
        if self is CouplingPolicy.DUPLICUBE:
            return 1
        return 1 << (n - k)

    def table_row(self, copy: IntOrArray) -> IntOrArray:
        """
        Map copy indices of G_k to stored table rows.

        Copies sent to the same row share a matching; this is the hook for
        couplings beyond the shipped ones.
        """
        if self is CouplingPolicy.DUPLICUBE:
            return np.zeros_like(copy) if isinstance(copy, np.ndarray) else 0
        return copy


_POLICY_CODES = {
    CouplingPolicy.INDEPENDENT: 0,
    CouplingPolicy.DUPLICUBE: 1,
    CouplingPolicy.IDENTITY: 2,
}


@dataclass(frozen=True, eq=False)
class MatchingLevel:
    """
    The level-k matchings, one row per stored copy.

    ``forward[r, x]`` is the low part of the partner of the vertex with low
    part x and coordinate k equal to 0; ``inverse`` undoes it.
    """

    level: int
    forward: np.ndarray
    inverse: np.ndarray

    @property
    def rows(self) -> int:
        return int(self.forward.shape[0])

    @property
    def half(self) -> int:
        return int(self.forward.shape[1])

    @classmethod
    def from_forward(cls, level: int, forward: np.ndarray) -> 'MatchingLevel':
        """Validate forward tables and materialize their inverses."""
        forward = np.array(forward, dtype=TABLE_DTYPE, copy=True)
        half = 1 << (level - 1)
        if forward.ndim != 2 or forward.shape[1] != half:
            raise ValueError(f"Level {level} tables must have {half} entries per copy")

        bad_rows = non_bijective_rows(forward)
        if bad_rows:
            raise ValueError(f"Level {level} copy {bad_rows[0]} table is not a bijection")

        inverse = np.empty_like(forward)
        _invert_into(forward, inverse)
        return cls(level=level, forward=_frozen(forward), inverse=_frozen(inverse))

    def same_as(self, other: 'MatchingLevel') -> bool:
        return (
            self.level == other.level
            and np.array_equal(self.forward, other.forward)
            and np.array_equal(self.inverse, other.inverse)
        )


@dataclass(frozen=True, eq=False)
class TwistedCube:
    """An immutable built graph: dimension, policy, seed and per-level matchings."""

    n: int
    policy: CouplingPolicy
    seed: int
    levels: Tuple[MatchingLevel, ...]

    def __post_init__(self):
        check_dimension(self.n)
        expected = 0 if self.policy is CouplingPolicy.IDENTITY else self.n - 1
        if len(self.levels) != expected:
            raise ValueError(
                f"{self.policy.value} graph of dimension {self.n} needs {expected} matching levels"
            )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TwistedCube):
            return NotImplemented
        return (
            self.n == other.n
            and self.policy is other.policy
            and self.seed == other.seed
            and all(a.same_as(b) for a, b in zip(self.levels, other.levels))
        )

    __hash__ = None  # type: ignore[assignment]

    @property
    def num_vertices(self) -> int:
        return 1 << self.n

    @property
    def table_bytes(self) -> int:
        return sum(lvl.forward.nbytes + lvl.inverse.nbytes for lvl in self.levels)

    def level(self, k: int) -> MatchingLevel:
        """Stored tables of level k (2 <= k <= n, not for the identity policy)."""
        if not self.levels or not 2 <= k <= self.n:
            raise LevelError(f"No stored matching for level {k}")
        return self.levels[k - 2]

    def check_vertex(self, v: int) -> None:
        if not 0 <= v < self.num_vertices:
            raise VertexError(f"Vertex {v} out of range for n = {self.n} (need 0 <= v < {self.num_vertices})")

    def check_level(self, k: int) -> None:
        if not 1 <= k <= self.n:
            raise LevelError(f"Level {k} out of range: need 1 <= k <= {self.n}")

    def neighbor(self, v: int, k: int) -> int:
        """eta_k(v): flip coordinate k, keep higher ones, remap lower ones."""
        self.check_vertex(v)
        self.check_level(k)
        return self.eta(v, k)

    def eta(self, v: int, k: int) -> int:
        """Unchecked neighbor oracle for hot loops."""
        bit = 1 << (k - 1)
        if k == 1 or not self.levels:
            return v ^ bit

        table = self.levels[k - 2]
        copy = v >> k
        row = self.policy.table_row(copy)
        low = v & (bit - 1)
        if v & bit:
            return (copy << k) | int(table.inverse[row, low])
        return (copy << k) | bit | int(table.forward[row, low])

    def neighbors(self, v: int) -> List[int]:
        """[eta_1(v), ..., eta_n(v)]."""
        self.check_vertex(v)
        return [self.eta(v, k) for k in range(1, self.n + 1)]

    def neighbor_array(self, vertices: np.ndarray, k: int) -> np.ndarray:
        """Vectorized eta_k over an array of labels (int64 in, int64 out)."""
        self.check_level(k)
        vs = np.asarray(vertices, dtype=np.int64)
        bit = 1 << (k - 1)
        if k == 1 or not self.levels:
            return vs ^ bit

        table = self.levels[k - 2]
        copy = vs >> k
        rows = self.policy.table_row(copy)
        low = vs & (bit - 1)
        upper = (vs & bit) != 0
        mapped = np.where(upper, table.inverse[rows, low], table.forward[rows, low]).astype(np.int64)
        return (copy << k) | np.where(upper, 0, bit) | mapped

    def adjacency(self) -> np.ndarray:
        """Neighbor table of shape (n, 2^n): row k-1 holds eta_k of every vertex."""
        everyone = np.arange(self.num_vertices, dtype=np.int64)
        return np.stack([self.neighbor_array(everyone, k) for k in range(1, self.n + 1)])

    def subcube(self, u: int, k: int) -> 'TwistedCube':
        """
        The copy of G_k containing u, relabelled by its low k coordinates.

        Vertex w of the copy maps to ``w & (2^k - 1)``; the result shares the
        parent's seed but is a view, not something build() reproduces.
        """
        self.check_vertex(u)
        check_dimension(k)
        if k > self.n:
            raise DimensionError(f"Subcube dimension {k} exceeds n = {self.n}")

        copy = u >> k
        levels = []
        for lvl in self.levels[: max(k - 1, 0)]:
            span = 1 << (k - lvl.level)
            if self.policy is CouplingPolicy.DUPLICUBE:
                rows = slice(0, 1)
            else:
                rows = slice(copy * span, (copy + 1) * span)
            levels.append(
                MatchingLevel(level=lvl.level, forward=lvl.forward[rows], inverse=lvl.inverse[rows])
            )
        return TwistedCube(n=k, policy=self.policy, seed=self.seed, levels=tuple(levels))


def check_dimension(n: int) -> None:
    if not 1 <= n <= MAX_DIMENSION:
        raise DimensionError(f"dimension out of range: n = {n} (supported 1..{MAX_DIMENSION})")


def check_seed(seed: int) -> None:
    if not 0 <= seed <= MAX_SEED:
        raise ValueError(f"Seed must be an unsigned 64-bit integer (got {seed})")


def coordinate(v: int, k: int) -> int:
    """Coordinate k (1-indexed) of label v."""
    return (v >> (k - 1)) & 1


def alpha(u: int, v: int) -> int:
    """Largest coordinate in which u and v differ; 0 iff u == v."""
    return (u ^ v).bit_length()


def alpha_array(u: IntOrArray, v: IntOrArray) -> np.ndarray:
    """Vectorized alpha; exact for labels below 2^53."""
    diff = np.bitwise_xor(np.asarray(u, dtype=np.int64), np.asarray(v, dtype=np.int64))
    return np.frexp(diff.astype(np.float64))[1].astype(np.int64)


def neighbor(G: TwistedCube, v: int, k: int) -> int:
    return G.neighbor(v, k)


def neighbors(G: TwistedCube, v: int) -> List[int]:
    return G.neighbors(v)


def required_bytes(n: int, policy: Union[CouplingPolicy, str]) -> int:
    """Bytes of forward plus inverse tables build() would allocate."""
    policy = CouplingPolicy(policy)
    entries = sum(policy.stored_copies(n, k) << (k - 1) for k in range(2, n + 1))
    return 2 * entries * TABLE_ENTRY_BYTES


def non_bijective_rows(forward: np.ndarray) -> List[int]:
    """Rows of a (rows, half) table that are not permutations of range(half)."""
    expected = np.arange(forward.shape[1], dtype=forward.dtype)
    ok = np.all(np.sort(forward, axis=1) == expected, axis=1)
    return [int(r) for r in np.nonzero(~ok)[0]]


def build(
    n: int,
    policy: Union[CouplingPolicy, str],
    seed: int,
    *,
    threads: Optional[int] = None,
    budget: Optional[int] = None,
) -> TwistedCube:
    """
    Sample a twisted hypercube of dimension n.

    Every stored matching is a uniform permutation shuffled from a stream
    keyed by (seed, level, block). Level 1 is the fixed edge of K_2 and is
    never stored. The result does not depend on ``threads``.
    """
    policy = CouplingPolicy(policy)
    check_dimension(n)
    check_seed(seed)

    required = required_bytes(n, policy)
    allowed = memory_budget(budget)
    if required > allowed:
        raise MemoryBudgetError(required=required, allowed=allowed)

    if policy is CouplingPolicy.IDENTITY:
        return TwistedCube(n=n, policy=policy, seed=seed, levels=())

    forwards = []
    inverses = []
    tasks = []
    for k in range(2, n + 1):
        rows = policy.stored_copies(n, k)
        half = 1 << (k - 1)
        forwards.append(np.empty((rows, half), dtype=TABLE_DTYPE))
        inverses.append(np.empty((rows, half), dtype=TABLE_DTYPE))
        per_block = max(1, BLOCK_ENTRIES // half)
        for block, start in enumerate(range(0, rows, per_block)):
            tasks.append((k, block, start, min(start + per_block, rows)))

    def fill(task: Tuple[int, int, int, int]) -> None:
        k, block, start, stop = task
        stream = np.random.SeedSequence(seed, spawn_key=(k, block))
        rng = np.random.Generator(np.random.PCG64(stream))
        chunk = forwards[k - 2][start:stop]
        chunk[:] = np.arange(chunk.shape[1], dtype=TABLE_DTYPE)
        rng.permuted(chunk, axis=1, out=chunk)
        _invert_into(chunk, inverses[k - 2][start:stop])

    workers = min(resolve_threads(threads), len(tasks))
    logger.debug("building n=%d %s seed=%d: %d blocks on %d threads, %d bytes",
                 n, policy.value, seed, len(tasks), workers, required)
    if workers <= 1:
        for task in tasks:
            fill(task)
    else:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            list(executor.map(fill, tasks))

    levels = tuple(
        MatchingLevel(level=k, forward=_frozen(fwd), inverse=_frozen(inv))
        for k, fwd, inv in zip(range(2, n + 1), forwards, inverses)
    )
    return TwistedCube(n=n, policy=policy, seed=seed, levels=levels)


def _invert_into(forward: np.ndarray, inverse: np.ndarray) -> None:
    rows = np.arange(forward.shape[0])[:, None]
    inverse[rows, forward] = np.arange(forward.shape[1], dtype=inverse.dtype)


def _frozen(array: np.ndarray) -> np.ndarray:
    array.flags.writeable = False
    return array

