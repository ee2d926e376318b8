"""
Routing: the greedy alpha-flipping walk and the ball-search twist router.

All logarithms are base 2.
"""

import math
from collections import deque
from typing import Dict, List, Optional, Tuple

from .core import TwistedCube, alpha
from .models import RoutePath, RouterParams

# vertex -> (previous vertex, level of the hop that reached it)
Parents = Dict[int, Tuple[int, int]]


def default_params(n: int) -> RouterParams:
    """
    Default schedule: n0 = ceil(n / log2(n)^2), t = floor(log2 n0 / (4 log2 log2 n0)).

    The asymptotic schedule degenerates at small n, so n0 is at least 1 and t
    at least 2 (t = 2 whenever n0 < 5).
    """
    if n == 1:
        n0 = 1
    else:
        n0 = max(1, math.ceil(n / math.log2(n) ** 2))

    t = 2
    if n0 >= 5:
        log_n0 = math.log2(n0)
        t = max(2, math.floor(log_n0 / (4 * math.log2(log_n0))))
    return RouterParams(t=t, n0=n0)


def theoretical_length_bound(n: int, params: RouterParams) -> Optional[float]:
    """n0 + (t+1)/(t-2) * n / log2 n0, the path-length bound when every phase drops (t-2) log2 n0."""
    if params.t <= 2 or params.n0 <= 1:
        return None
    return params.n0 + (params.t + 1) / (params.t - 2) * n / math.log2(params.n0)


def greedy_route(G: TwistedCube, u: int, v: int) -> RoutePath:
    """Walk u -> v flipping the highest differing coordinate each step."""
    G.check_vertex(u)
    G.check_vertex(v)
    vertices, levels = _greedy_walk(G, u, v)
    return RoutePath(vertices=vertices, levels=levels, alpha_trace=[alpha(u, v)])


def _greedy_walk(G: TwistedCube, u: int, v: int) -> Tuple[List[int], List[int]]:
    vertices = [u]
    levels = []
    current = u
    k = alpha(current, v)
    while k:
        current = G.eta(current, k)
        vertices.append(current)
        levels.append(k)
        k = alpha(current, v)
    return vertices, levels


def _ball_search(G: TwistedCube, center: int, radius: int, cap: int) -> Tuple[Dict[int, int], Parents]:
    """BFS from center using only levels below cap; distances and parent pointers."""
    top = min(cap - 1, G.n)
    dist = {center: 0}
    parents: Parents = {}
    queue = deque([center])
    while queue:
        w = queue.popleft()
        d = dist[w]
        if d == radius:
            continue
        for j in range(1, top + 1):
            x = G.eta(w, j)
            if x not in dist:
                dist[x] = d + 1
                parents[x] = (w, j)
                queue.append(x)
    return dist, parents


def ball_bfs(G: TwistedCube, center: int, radius: int, cap: int) -> Dict[int, int]:
    """
    Vertices within radius of center in the subcube fixed on coordinates >= cap.

    Only levels j < cap are used, so every vertex found agrees with center on
    coordinates cap..n. cap = n + 1 explores the whole graph. Returns
    vertex -> exact distance inside that subcube.
    """
    G.check_vertex(center)
    if not 1 <= cap <= G.n + 1:
        raise ValueError(f"Ball cap must lie in [1, {G.n + 1}] (got {cap})")
    if radius < 0:
        raise ValueError(f"Ball radius must be non-negative (got {radius})")

    dist, _ = _ball_search(G, center, radius, cap)
    return dist


def _trace_back(parents: Parents, center: int, w: int) -> Tuple[List[int], List[int]]:
    vertices = [w]
    levels = []
    while w != center:
        w, j = parents[w]
        vertices.append(w)
        levels.append(j)
    vertices.reverse()
    levels.reverse()
    return vertices, levels


def twist_route(G: TwistedCube, u: int, v: int, params: Optional[RouterParams] = None) -> RoutePath:
    """
    Ball-search router.

    While k = alpha(cur, v) >= n0: search the radius-t ball around cur inside
    the copy of G_{k-1} holding cur, pick the w whose level-k partner is
    closest to v in alpha (ties: nearer w, then smaller label), walk to w and
    hop across level k. Once alpha < n0 the greedy walk finishes the route.
    Each phase costs at most t + 1 edges and strictly lowers alpha, since
    w = cur already lands below k.
    """
    G.check_vertex(u)
    G.check_vertex(v)
    params = params or default_params(G.n)
    params.check_dimension(G.n)

    vertices = [u]
    levels: List[int] = []
    trace = []
    phase_lengths = []
    current = u

    k = alpha(current, v)
    while k >= params.n0:
        trace.append(k)
        dist, parents = _ball_search(G, current, params.t, k)
        best = min(dist, key=lambda w: (alpha(G.eta(w, k), v), dist[w], w))

        walk, hops = _trace_back(parents, current, best)
        current = G.eta(best, k)
        vertices.extend(walk[1:])
        vertices.append(current)
        levels.extend(hops)
        levels.append(k)
        phase_lengths.append(len(hops) + 1)
        k = alpha(current, v)

    trace.append(k)
    tail_vertices, tail_levels = _greedy_walk(G, current, v)
    vertices.extend(tail_vertices[1:])
    levels.extend(tail_levels)

    return RoutePath(
        vertices=vertices,
        levels=levels,
        phases=len(phase_lengths),
        alpha_trace=trace,
        phase_lengths=phase_lengths,
    )


def validate_path(G: TwistedCube, path: RoutePath, u: int, v: int) -> bool:
    """True iff path runs from u to v and every hop follows its recorded level."""
    if path.start != u or path.end != v:
        return False
    if len(path.levels) != len(path.vertices) - 1:
        return False

    size = G.num_vertices
    if any(not 0 <= x < size for x in path.vertices):
        return False

    for i, k in enumerate(path.levels):
        if not 1 <= k <= G.n:
            return False
        if G.eta(path.vertices[i], k) != path.vertices[i + 1]:
            return False
    return True
