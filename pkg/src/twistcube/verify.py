"""
Executable checks of the deterministic facts about twisted hypercubes.

Deterministic checks return a CheckReport whose failures hold witnesses;
any failure is a construction bug. The quasirandomness estimate is a
frequency report and never fails.
"""

import itertools
import logging
import math
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .core import TwistedCube, alpha, alpha_array
from .errors import EnumerationBudgetError
from .metrics import ball_profile, sampling_rng
from .models import CheckReport, FrequencyReport
from .routing import ball_bfs

logger = logging.getLogger(__name__)

EXHAUSTIVE_MAX_N = 12
EXHAUSTIVE_CHECK_LIMIT = 2 ** 24
DEFAULT_SAMPLES = 1024
DEFAULT_CENTERS = 10
INJECTIVITY_BUDGET = 1_000_000
MAX_WITNESSES = 50
LABEL_CHUNK = 1 << 22

QUASI_STREAM = 0xE7
CHECK_STREAM = 0xC4

SUITES = ('all', 'balls', 'injectivity', 'subcube', 'involution', 'quasi')

Report = Union[CheckReport, FrequencyReport]


def _report(G: TwistedCube, name: str, scope: str) -> CheckReport:
    return CheckReport(name=name, n=G.n, policy=G.policy.value, seed=G.seed, scope=scope)


def _witness(report: CheckReport, **fields: Any) -> None:
    report.details['failure_count'] = report.details.get('failure_count', 0) + 1
    if len(report.failures) < MAX_WITNESSES:
        report.failures.append(fields)


def _check_vertices(
    G: TwistedCube, exhaustive: bool, samples: int, seed: Optional[int]
) -> Tuple[np.ndarray, str]:
    if exhaustive:
        return np.arange(G.num_vertices, dtype=np.int64), 'exhaustive'
    rng = sampling_rng(G.seed if seed is None else seed, CHECK_STREAM)
    count = min(samples, G.num_vertices)
    return np.sort(rng.choice(G.num_vertices, size=count, replace=False)).astype(np.int64), 'sampled'


def ball_bound(n: int, t: int) -> int:
    """binom(n+1, t), the guaranteed ball size."""
    return math.comb(n + 1, t)


def ball_bound_sum(n: int, t: int) -> int:
    """sum_{s<=t} binom(n, s), the count of decreasing level sequences."""
    return sum(math.comb(n, s) for s in range(t + 1))


def check_ball_lower_bound(
    G: TwistedCube,
    t_max: int,
    *,
    samples: int = DEFAULT_SAMPLES,
    seed: Optional[int] = None,
    threads: Optional[int] = None,
) -> CheckReport:
    """Every ball B(v, t), t <= t_max, holds at least binom(n+1, t) vertices."""
    if not 0 <= t_max <= G.n:
        raise ValueError(f"t_max must lie in [0, {G.n}] (got {t_max})")

    vertices, scope = _check_vertices(G, G.n <= EXHAUSTIVE_MAX_N, samples, seed)
    if scope == 'exhaustive':
        profile = ball_profile(G, vertices, t_max, threads=threads)
    else:
        profile = np.zeros((len(vertices), t_max + 1), dtype=np.int64)
        for row, v in enumerate(vertices.tolist()):
            dist = ball_bfs(G, v, t_max, G.n + 1)
            counts = np.bincount(np.fromiter(dist.values(), dtype=np.int64), minlength=t_max + 1)
            profile[row] = np.cumsum(counts)

    report = _report(G, 'ball_lower_bound', scope)
    report.checked = int(profile.size)
    minima = []
    for t in range(t_max + 1):
        required = ball_bound(G.n, t)
        column = profile[:, t]
        minima.append(int(column.min()))
        for row in np.nonzero(column < required)[0]:
            _witness(report, vertex=int(vertices[row]), t=t, observed=int(column[row]), required=required)

    report.details.update({
        't_max': t_max,
        'vertices': len(vertices),
        'min_ball': minima,
        'required': [ball_bound(G.n, t) for t in range(t_max + 1)],
        'sequence_count': [ball_bound_sum(G.n, t) for t in range(t_max + 1)],
    })
    return report


def recover_levels(G: TwistedCube, v: int, w: int) -> Tuple[int, ...]:
    """Peel off levels a_1 > a_2 > ... with a_i = alpha(current, w)."""
    levels = []
    current = v
    while current != w and len(levels) <= G.n:
        a = alpha(current, w)
        levels.append(a)
        current = G.eta(current, a)
    return tuple(levels)


def check_injectivity(
    G: TwistedCube, v: int, t: int, *, budget: int = INJECTIVITY_BUDGET
) -> CheckReport:
    """
    The map {a_1 > ... > a_s} -> eta_{a_s}(...eta_{a_1}(v)) on sets of size
    <= t is injective, lands in B(v, t), and a_1 = alpha(v, image).
    """
    G.check_vertex(v)
    if not 0 <= t <= G.n:
        raise ValueError(f"t must lie in [0, {G.n}] (got {t})")
    total = ball_bound_sum(G.n, t)
    if total > budget:
        raise EnumerationBudgetError(
            f"injectivity enumeration needs {total} sets, budget is {budget}"
        )

    ball = ball_bfs(G, v, t, G.n + 1)
    images: Dict[int, Tuple[int, ...]] = {}
    report = _report(G, 'injectivity', 'exhaustive')

    for s in range(t + 1):
        for levels in itertools.combinations(range(G.n, 0, -1), s):
            w = v
            for a in levels:
                w = G.eta(w, a)
            report.checked += 1

            if w in images:
                _witness(report, vertex=v, sets=[list(images[w]), list(levels)], image=w, reason='collision')
            else:
                images[w] = levels
            if w not in ball:
                _witness(report, vertex=v, set=list(levels), image=w, reason='outside ball')
            if levels:
                if alpha(v, w) != levels[0]:
                    _witness(report, vertex=v, set=list(levels), image=w,
                             observed=alpha(v, w), required=levels[0], reason='first level')
                recovered = recover_levels(G, v, w)
                if recovered != levels:
                    _witness(report, vertex=v, set=list(levels), image=w,
                             observed=list(recovered), reason='recovery')

    report.details.update({'center': v, 't': t, 'images': len(images), 'expected': total})
    return report


def count_within_alpha(n: int, v: int, k: int) -> int:
    """#{w < 2^n : alpha(w, v) <= k}, counted label by label."""
    count = 0
    size = 1 << n
    for start in range(0, size, LABEL_CHUNK):
        labels = np.arange(start, min(start + LABEL_CHUNK, size), dtype=np.int64)
        count += int(np.count_nonzero(alpha_array(labels, v) <= k))
    return count


def check_subcube_size(G: TwistedCube, v: int, k: int) -> CheckReport:
    """Exactly 2^k labels sit within alpha <= k of v."""
    G.check_vertex(v)
    if not 0 <= k <= G.n:
        raise ValueError(f"k must lie in [0, {G.n}] (got {k})")

    report = _report(G, 'subcube_size', 'exhaustive')
    observed = count_within_alpha(G.n, v, k)
    report.checked = 1
    if observed != 1 << k:
        _witness(report, vertex=v, k=k, observed=observed, required=1 << k)
    report.details.update({'vertex': v, 'k': k, 'count': observed})
    return report


def check_subcube_counts(
    G: TwistedCube, *, samples: int = DEFAULT_SAMPLES, seed: Optional[int] = None
) -> CheckReport:
    """Subcube counts 2^k for every k <= n, over all (or sampled) centres."""
    exhaustive = G.num_vertices * G.num_vertices <= EXHAUSTIVE_CHECK_LIMIT
    vertices, scope = _check_vertices(G, exhaustive, samples, seed)
    report = _report(G, 'subcube_counts', scope)
    everyone = np.arange(G.num_vertices, dtype=np.int64) if exhaustive else None
    expected = 1 << np.arange(G.n + 1, dtype=np.int64)

    for v in vertices.tolist():
        if everyone is not None:
            counts = np.cumsum(np.bincount(alpha_array(everyone, v), minlength=G.n + 1))
        else:
            counts = np.array([count_within_alpha(G.n, v, k) for k in range(G.n + 1)])
        report.checked += G.n + 1
        for k in np.nonzero(counts != expected)[0]:
            _witness(report, vertex=v, k=int(k), observed=int(counts[k]), required=int(expected[k]))

    report.details['vertices'] = len(vertices)
    return report


def check_matching_involution(
    G: TwistedCube, *, samples: int = DEFAULT_SAMPLES, seed: Optional[int] = None
) -> CheckReport:
    """eta_k(eta_k(v)) = v and eta_k(v) differs from v at k and agrees above k."""
    vertices, scope = _check_vertices(G, G.n <= EXHAUSTIVE_MAX_N, samples, seed)
    report = _report(G, 'matching_involution', scope)

    for k in range(1, G.n + 1):
        there = G.neighbor_array(vertices, k)
        back = G.neighbor_array(there, k)
        contract = ((there ^ vertices) >> (k - 1)) == 1
        report.checked += len(vertices)
        for i in np.nonzero(back != vertices)[0]:
            _witness(report, vertex=int(vertices[i]), k=k, neighbor=int(there[i]),
                     back=int(back[i]), reason='not an involution')
        for i in np.nonzero(~contract)[0]:
            _witness(report, vertex=int(vertices[i]), k=k, neighbor=int(there[i]),
                     reason='coordinate contract')
    return report


def check_degree(
    G: TwistedCube, *, samples: int = DEFAULT_SAMPLES, seed: Optional[int] = None
) -> CheckReport:
    """Every vertex has n distinct neighbours, none equal to itself."""
    vertices, scope = _check_vertices(G, G.n <= EXHAUSTIVE_MAX_N, samples, seed)
    report = _report(G, 'degree', scope)

    table = np.stack([G.neighbor_array(vertices, k) for k in range(1, G.n + 1)])
    ordered = np.sort(table, axis=0)
    repeated = np.any(ordered[1:] == ordered[:-1], axis=0)
    looped = np.any(table == vertices, axis=0)
    report.checked = len(vertices)
    for i in np.nonzero(repeated | looped)[0]:
        _witness(report, vertex=int(vertices[i]), neighbors=table[:, i].tolist(),
                 reason='self loop' if looped[i] else 'repeated neighbour')
    return report


def required_drop(k: int, t: int) -> int:
    """ceil((t-2) log2 k), at least 1."""
    if k <= 1:
        return 1
    return max(1, math.ceil((t - 2) * math.log2(k)))


def sample_alpha_pairs(n: int, k: int, count: int, seed: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    Uniform pairs with alpha(u, v) = k.

    u is uniform; v copies u above k, flips coordinate k and redraws the
    k-1 low coordinates.
    """
    rng = sampling_rng(seed, QUASI_STREAM, k)
    bit = 1 << (k - 1)
    us = rng.integers(0, 1 << n, size=count, dtype=np.int64)
    low = rng.integers(0, bit, size=count, dtype=np.int64)
    vs = ((us >> k) << k) | ((us & bit) ^ bit) | low
    return us, vs


def quasirandom_outcome(G: TwistedCube, u: int, v: int, k: int, t: int) -> Tuple[int, int]:
    """(min alpha(eta_k(w), v) over the radius-t ball of u below level k, ball size)."""
    ball = ball_bfs(G, u, t, k)
    best = min(alpha(G.eta(w, k), v) for w in ball)
    return best, len(ball)


def identity_closed_form(u: int, v: int, k: int, t: int) -> int:
    """
    quasirandom_outcome's minimum alpha for the identity policy.

    The ball is a Hamming ball on the low k-1 coordinates, so the best move
    clears the t highest low coordinates where u and v differ; what remains is
    the (t+1)-th highest such coordinate, or 0.
    """
    diff = (u ^ v) & ((1 << (k - 1)) - 1)
    for _ in range(t):
        if not diff:
            return 0
        diff ^= 1 << (diff.bit_length() - 1)
    return diff.bit_length()


def exact_miss_probability(ball: int, half: int, target: int) -> float:
    """
    P(a uniform ball-sized subset of half vertices misses a target-sized set):
    prod_{i<ball} (half - target - i) / (half - i).
    """
    if half - target < ball:
        return 0.0
    if ball == 0 or target == 0:
        return 1.0
    log_p = (
        math.lgamma(half - target + 1) - math.lgamma(half - target - ball + 1)
        - math.lgamma(half + 1) + math.lgamma(half - ball + 1)
    )
    return math.exp(log_p)


def miss_bound(k: int, t: int, ball: int) -> float:
    """(1 - k^-(t-2))^|B'|, clamped to [0, 1]."""
    base = 1.0 - float(k) ** (-(t - 2))
    return min(1.0, max(0.0, base)) ** ball


def estimate_quasirandomness(
    G: TwistedCube, k: int, t: int, num_pairs: int, seed: Optional[int] = None
) -> FrequencyReport:
    """
    Sample pairs with alpha(u, v) = k and count how often no vertex w of the
    radius-t ball around u (inside u's copy of G_{k-1}) has
    alpha(eta_k(w), v) <= k - required_drop(k, t).
    """
    G.check_level(k)
    if t < 0:
        raise ValueError(f"t must be non-negative (got {t})")
    if num_pairs < 1:
        raise ValueError(f"Need at least one pair (got {num_pairs})")

    warnings = []
    if G.n >= 2 and k < G.n / math.log2(G.n) ** 2:
        warnings.append(f"k = {k} is below n/log2(n)^2 = {G.n / math.log2(G.n) ** 2:.2f}")
    if t >= 1 and k < 4 * t ** (2 * t):
        warnings.append(f"k = {k} is below 4 t^(2t) = {4 * t ** (2 * t)}; the high-probability regime is out of reach")
    for message in warnings:
        logger.warning(message)

    drop = required_drop(k, t)
    threshold = k - drop
    half = 1 << (k - 1)
    target = 1 << threshold if threshold >= 0 else 0

    us, vs = sample_alpha_pairs(G.n, k, num_pairs, G.seed if seed is None else seed)
    misses = 0
    sizes: List[int] = []
    for u, v in zip(us.tolist(), vs.tolist()):
        best, size = quasirandom_outcome(G, u, v, k, t)
        sizes.append(size)
        if best > threshold:
            misses += 1

    exact = [exact_miss_probability(size, half, target) for size in sizes]
    bounds = [miss_bound(k, t, size) for size in sizes]
    min_ball = min(sizes)
    return FrequencyReport(
        n=G.n,
        policy=G.policy.value,
        seed=G.seed,
        k=k,
        t=t,
        pairs=num_pairs,
        drop=drop,
        threshold=threshold,
        misses=misses,
        mean_ball=float(np.mean(sizes)),
        min_ball=min_ball,
        target_size=target,
        exact_miss_mean=float(np.mean(exact)),
        bound_mean=float(np.mean(bounds)),
        bound_at_min_ball=miss_bound(k, t, min_ball),
        exp_bound=math.exp(-k * k / t ** t) if t >= 1 else 1.0,
        warnings=warnings,
    )


def diameter_lower_bound(n: int) -> int:
    """ceil((n-1)/log2 n)."""
    if n < 2:
        raise ValueError(f"The counting bound needs n >= 2 (got {n})")
    return math.ceil((n - 1) / math.log2(n))


def vertices_within(n: int, d: int) -> int:
    """Counting cap min(2^n, 2 n^d) on vertices within distance d in an n-regular graph."""
    return min(1 << n, 2 * n ** d)


def check_diameter_lower_bound(n: int, diameter: int) -> bool:
    return diameter >= diameter_lower_bound(n)


def run_suite(
    G: TwistedCube,
    suite: str = 'all',
    *,
    t: Optional[int] = None,
    k: Optional[int] = None,
    pairs: int = 1000,
    samples: int = DEFAULT_SAMPLES,
    centers: int = DEFAULT_CENTERS,
    seed: Optional[int] = None,
    threads: Optional[int] = None,
) -> List[Report]:
    """Run one named suite (or all of them) and collect the reports."""
    if suite not in SUITES:
        raise ValueError(f"Unknown suite '{suite}' (choose from {', '.join(SUITES)})")

    seed = G.seed if seed is None else seed
    radius = min(3 if t is None else t, G.n)
    selected = SUITES[1:] if suite == 'all' else (suite,)
    reports: List[Report] = []

    if 'balls' in selected:
        reports.append(check_ball_lower_bound(G, radius, samples=samples, seed=seed, threads=threads))

    if 'injectivity' in selected:
        rng = sampling_rng(seed, CHECK_STREAM, 1)
        chosen = rng.choice(G.num_vertices, size=min(centers, G.num_vertices), replace=False)
        merged: Optional[CheckReport] = None
        for v in sorted(int(c) for c in chosen):
            part = check_injectivity(G, v, radius)
            merged = part if merged is None else merged.merge(part)
        if merged is not None:
            merged.details = {'t': radius, 'centers': len(chosen), 'expected': ball_bound_sum(G.n, radius)}
            reports.append(merged)

    if 'subcube' in selected:
        reports.append(check_subcube_counts(G, samples=samples, seed=seed))

    if 'involution' in selected:
        reports.append(check_matching_involution(G, samples=samples, seed=seed))
        reports.append(check_degree(G, samples=samples, seed=seed))

    if 'quasi' in selected:
        level = G.n if k is None else k
        reports.append(estimate_quasirandomness(G, level, 3 if t is None else t, pairs, seed))

    return reports


def all_passed(reports: Sequence[Report]) -> bool:
    """True iff every deterministic check passed; frequency reports never fail."""
    return all(r.passed for r in reports if isinstance(r, CheckReport))
