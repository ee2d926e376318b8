"""
Distances, eccentricities and diameters.

Single-source BFS works on frontier arrays with the vectorized neighbor
oracle. Many-source work (all-pairs diameter, exhaustive ball sizes) runs a
bit-parallel BFS: every vertex carries one bit per source, packed 64 to a
uint64 word, and a BFS step ORs together the words gathered through each
level's neighbor table.
"""

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterator, List, Optional, Sequence, Tuple, TypeVar

import numpy as np

from .core import TwistedCube
from .errors import DiameterCapError
from .models import DiameterMethod, DiameterReport, RouterParams
from .routing import ball_bfs, twist_route
from .utils import resolve_threads

logger = logging.getLogger(__name__)

UNREACHED = 255
DEFAULT_EXACT_CAP = 16
DEFAULT_RESTARTS = 4
DEFAULT_SOURCES = 16
DEFAULT_PAIRS = 256
BATCH_SOURCES = 512
SAMPLING_STREAM = 0xD1A

T = TypeVar('T')


def sampling_rng(seed: int, *tags: int) -> np.random.Generator:
    """Generator for measurement sampling, independent of the construction streams."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=tags)))


def bfs_distances(G: TwistedCube, source: int) -> np.ndarray:
    """Exact distances from source to every vertex, as uint8."""
    G.check_vertex(source)
    dist = np.full(G.num_vertices, UNREACHED, dtype=np.uint8)
    dist[source] = 0
    frontier = np.array([source], dtype=np.int64)
    depth = 0
    while frontier.size:
        depth += 1
        found = []
        for k in range(1, G.n + 1):
            candidates = G.neighbor_array(frontier, k)
            candidates = candidates[dist[candidates] == UNREACHED]
            # eta_k is a bijection, so one level never yields duplicates
            dist[candidates] = depth
            found.append(candidates)
        frontier = np.concatenate(found)
    return dist


def eccentricity(G: TwistedCube, v: int) -> int:
    return int(bfs_distances(G, v).max())


def _unpack_sources(words: np.ndarray) -> np.ndarray:
    """Per-source bits (little-endian within each word) along the last axis."""
    as_bytes = np.ascontiguousarray(words, dtype='<u8').view(np.uint8)
    return np.unpackbits(as_bytes, axis=-1, bitorder='little')


def _frontier_levels(
    adjacency: np.ndarray, sources: np.ndarray, max_depth: Optional[int] = None
) -> Iterator[Tuple[int, np.ndarray]]:
    """Yield (depth, bits newly reached at depth) of a bit-parallel BFS."""
    size = adjacency.shape[1]
    count = len(sources)
    words = (count + 63) // 64
    index = np.arange(count)

    frontier = np.zeros((size, words), dtype=np.uint64)
    bits = np.left_shift(np.uint64(1), (index % 64).astype(np.uint64))
    np.bitwise_or.at(frontier, (np.asarray(sources, dtype=np.int64), index // 64), bits)
    visited = frontier.copy()
    yield 0, frontier

    gathered = np.empty_like(frontier)
    depth = 0
    while max_depth is None or depth < max_depth:
        reached = np.zeros_like(frontier)
        for row in adjacency:
            np.take(frontier, row, axis=0, out=gathered)
            reached |= gathered
        new = reached & ~visited
        if not new.any():
            return
        visited |= new
        frontier = new
        depth += 1
        yield depth, new


def _in_batches(
    sources: np.ndarray, work: Callable[[np.ndarray], T], threads: Optional[int]
) -> List[T]:
    batches = [sources[i:i + BATCH_SOURCES] for i in range(0, len(sources), BATCH_SOURCES)]
    workers = min(resolve_threads(threads), max(len(batches), 1))
    if workers <= 1:
        return [work(batch) for batch in batches]
    with ThreadPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(work, batches))


def _sources_array(G: TwistedCube, sources: Optional[Sequence[int]]) -> np.ndarray:
    if sources is None:
        return np.arange(G.num_vertices, dtype=np.int64)
    array = np.asarray(sources, dtype=np.int64)
    if array.size and (array.min() < 0 or array.max() >= G.num_vertices):
        raise ValueError(f"Sources must lie in [0, {G.num_vertices})")
    return array


def eccentricities(
    G: TwistedCube, sources: Optional[Sequence[int]] = None, threads: Optional[int] = None
) -> np.ndarray:
    """Eccentricity of every source (all vertices by default), bit-parallel."""
    srcs = _sources_array(G, sources)
    adjacency = G.adjacency()

    def run(batch: np.ndarray) -> np.ndarray:
        ecc = np.zeros(len(batch), dtype=np.int64)
        for depth, new in _frontier_levels(adjacency, batch):
            hit = _unpack_sources(np.bitwise_or.reduce(new, axis=0))[: len(batch)]
            ecc[hit.astype(bool)] = depth
        return ecc

    parts = _in_batches(srcs, run, threads)
    return np.concatenate(parts) if parts else np.zeros(0, dtype=np.int64)


def ball_profile(
    G: TwistedCube, sources: Optional[Sequence[int]], radius: int, threads: Optional[int] = None
) -> np.ndarray:
    """
    Ball sizes |B(v, s)| for every source v and every s <= radius.

    Returns an array of shape (len(sources), radius + 1).
    """
    if radius < 0:
        raise ValueError(f"Radius must be non-negative (got {radius})")
    srcs = _sources_array(G, sources)
    adjacency = G.adjacency()

    def run(batch: np.ndarray) -> np.ndarray:
        counts = np.zeros((len(batch), radius + 1), dtype=np.int64)
        for depth, new in _frontier_levels(adjacency, batch, max_depth=radius):
            counts[:, depth] = _unpack_sources(new).sum(axis=0)[: len(batch)]
        return np.cumsum(counts, axis=1)

    parts = _in_batches(srcs, run, threads)
    return np.concatenate(parts) if parts else np.zeros((0, radius + 1), dtype=np.int64)


def exact_diameter(G: TwistedCube, cap: int = DEFAULT_EXACT_CAP, threads: Optional[int] = None) -> int:
    """Diameter by all-pairs BFS; refuses n above cap."""
    if G.n > cap:
        raise DiameterCapError(G.n, cap)
    return int(eccentricities(G, threads=threads).max())


def double_sweep(G: TwistedCube, start: int, restarts: int = DEFAULT_RESTARTS) -> Tuple[int, int]:
    """
    Repeated farthest-vertex BFS from start.

    Returns (best eccentricity seen, vertex it was seen from). Stops early
    once the farthest vertex stops changing.
    """
    best, best_from = 0, start
    current = start
    for _ in range(max(restarts, 1)):
        dist = bfs_distances(G, current)
        far = int(dist.argmax())
        ecc = int(dist[far])
        if ecc > best:
            best, best_from = ecc, current
        if far == current:
            break
        current = far
    return best, best_from


def diameter_bounds_sampled(
    G: TwistedCube,
    num_sources: int = DEFAULT_SOURCES,
    num_pairs: int = DEFAULT_PAIRS,
    seed: int = 0,
    *,
    restarts: int = DEFAULT_RESTARTS,
    params: Optional[RouterParams] = None,
    threads: Optional[int] = None,
) -> DiameterReport:
    """
    Bracket the diameter without all-pairs BFS.

    lower_bound is the largest eccentricity over the sampled sources, refined
    by a double sweep from the farthest vertex found; it never exceeds the
    true diameter. upper_bound is the longest twist route over the sampled
    pairs capped by n (and raised to lower_bound if needed); unless it equals
    n it is a route statistic, flagged as heuristic.
    """
    started = time.perf_counter()
    rng = sampling_rng(seed, SAMPLING_STREAM)
    size = G.num_vertices

    if num_sources >= size:
        lower = int(eccentricities(G, threads=threads).max())
        sampled = size
    else:
        sources = np.unique(rng.integers(0, size, size=max(num_sources, 1)))
        lower, far = 0, int(sources[0])
        for s in sources:
            dist = bfs_distances(G, int(s))
            ecc = int(dist.max())
            if ecc > lower:
                lower, far = ecc, int(dist.argmax())
        swept, _ = double_sweep(G, far, restarts)
        lower = max(lower, swept)
        sampled = len(sources)

    longest = 0
    if num_pairs > 0:
        us = rng.integers(0, size, size=num_pairs)
        vs = rng.integers(0, size, size=num_pairs)
        for u, v in zip(us.tolist(), vs.tolist()):
            longest = max(longest, twist_route(G, u, v, params).length)
        upper = max(lower, min(G.n, longest))
    else:
        upper = G.n

    report = DiameterReport(
        n=G.n,
        policy=G.policy.value,
        seed=G.seed,
        lower_bound=lower,
        upper_bound=upper,
        method=DiameterMethod.SAMPLED_SWEEP,
        samples=sampled,
        pairs=num_pairs,
        wall_time=time.perf_counter() - started,
        upper_is_heuristic=upper < G.n,
    )
    logger.debug("sampled diameter n=%d: [%d, %d]", G.n, lower, upper)
    return report


def exact_report(G: TwistedCube, cap: int = DEFAULT_EXACT_CAP, threads: Optional[int] = None) -> DiameterReport:
    """exact_diameter wrapped as a report."""
    started = time.perf_counter()
    diameter = exact_diameter(G, cap=cap, threads=threads)
    return DiameterReport(
        n=G.n,
        policy=G.policy.value,
        seed=G.seed,
        exact=diameter,
        lower_bound=diameter,
        upper_bound=diameter,
        method=DiameterMethod.ALL_PAIRS,
        samples=G.num_vertices,
        wall_time=time.perf_counter() - started,
    )


def ball_size(G: TwistedCube, v: int, t: int) -> int:
    """|B(v, t)| in the whole graph."""
    if t < 0:
        raise ValueError(f"Radius must be non-negative (got {t})")
    return len(ball_bfs(G, v, t, G.n + 1))
