"""
Tests for distances and diameters.
"""

import math

import numpy as np
import pytest

from twistcube.core import alpha, alpha_array, build
from twistcube.errors import DiameterCapError
from twistcube.metrics import (
    ball_profile,
    ball_size,
    bfs_distances,
    diameter_bounds_sampled,
    double_sweep,
    eccentricities,
    eccentricity,
    exact_diameter,
    exact_report,
)
from twistcube.models import DiameterMethod
from twistcube.routing import ball_bfs, greedy_route
from twistcube.verify import diameter_lower_bound


@pytest.fixture(scope='module')
def graph():
    """A random graph small enough for all-pairs BFS."""
    return build(9, 'independent', 13)


def greedy_lengths(G, u):
    """Greedy route length from u to every vertex, stepping all targets at once."""
    targets = np.arange(G.num_vertices, dtype=np.int64)
    current = np.full_like(targets, u)
    lengths = np.zeros_like(targets)
    k = alpha_array(current, targets)
    while k.any():
        for level in np.unique(k[k > 0]).tolist():
            mask = k == level
            current[mask] = G.neighbor_array(current[mask], level)
        lengths += k > 0
        k = alpha_array(current, targets)
    return lengths


def test_bfs_hypercube_distances():
    """Hypercube distances are Hamming distances."""
    G = build(6, 'identity', 0)
    dist = bfs_distances(G, 0)
    assert dist.tolist() == [bin(v).count('1') for v in range(64)]
    assert eccentricity(G, 5) == 6


def test_bfs_reaches_everything(graph):
    """Twisted hypercubes are connected."""
    dist = bfs_distances(graph, 17)
    assert dist[17] == 0
    assert int(dist.max()) <= graph.n
    assert np.count_nonzero(dist == 1) == graph.n


@pytest.mark.parametrize('n', range(2, 9))
def test_hypercube_diameter(n):
    """The identity policy has diameter n."""
    assert exact_diameter(build(n, 'identity', 0)) == n


def test_single_edge_diameter():
    """n = 1 is a single edge."""
    for policy in ['independent', 'duplicube', 'identity']:
        assert exact_diameter(build(1, policy, 0)) == 1


def test_random_diameter_in_range():
    """Exact diameters sit between the counting bound and n."""
    G = build(10, 'independent', 1)
    d = exact_diameter(G)
    assert math.ceil(9 / math.log2(10)) <= d <= 10


def test_eccentricities_match_single_source(graph):
    """The bit-parallel BFS agrees with frontier BFS."""
    ecc = eccentricities(graph)
    expected = [int(bfs_distances(graph, v).max()) for v in range(graph.num_vertices)]
    assert ecc.tolist() == expected

    some = [3, 100, 511, 3]
    assert eccentricities(graph, some).tolist() == [expected[v] for v in some]


def test_eccentricities_independent_of_threads():
    """Batches of sources give the same answer on any number of threads."""
    G = build(10, 'duplicube', 2)
    assert np.array_equal(eccentricities(G, threads=1), eccentricities(G, threads=3))


def test_eccentricities_reject_bad_sources(graph):
    """Test rejected source labels."""
    with pytest.raises(ValueError, match="Sources"):
        eccentricities(graph, [graph.num_vertices])


def test_ball_profile_matches_ball_bfs(graph):
    """Cumulative ball sizes agree with explicit balls."""
    sources = [0, 9, 200, 511]
    profile = ball_profile(graph, sources, 3)

    assert profile.shape == (4, 4)
    for row, v in enumerate(sources):
        for t in range(4):
            assert profile[row, t] == len(ball_bfs(graph, v, t, graph.n + 1))


def test_ball_profile_radius_zero(graph):
    """Radius 0 balls are single vertices."""
    assert ball_profile(graph, None, 0).ravel().tolist() == [1] * graph.num_vertices
    with pytest.raises(ValueError):
        ball_profile(graph, [0], -1)


def test_ball_size_hypercube():
    """Test Hamming ball sizes."""
    G = build(8, 'identity', 0)
    assert ball_size(G, 0, 2) == 1 + 8 + 28
    assert ball_size(G, 0, 8) == 256


def test_exact_diameter_cap():
    """All-pairs BFS refuses dimensions above the cap."""
    G = build(10, 'independent', 0)
    with pytest.raises(DiameterCapError, match="capped"):
        exact_diameter(G, cap=8)


def test_exact_report(graph):
    """Test the exact report fields."""
    report = exact_report(graph)
    assert report.method is DiameterMethod.ALL_PAIRS
    assert report.exact == report.lower_bound == report.upper_bound
    assert report.samples == graph.num_vertices
    assert report.wall_time >= 0


def test_distances_symmetric(graph):
    """d(u, v) = d(v, u) on sampled pairs."""
    rng = np.random.default_rng(4)
    sources = rng.integers(0, graph.num_vertices, size=12).tolist()
    rows = {u: bfs_distances(graph, u) for u in sources}
    for u in sources:
        for v in sources:
            assert rows[u][v] == rows[v][u]


def test_triangle_inequality(graph):
    """d(u, w) <= d(u, v) + d(v, w) for sampled u, v and every w."""
    rng = np.random.default_rng(5)
    for u, v in rng.integers(0, graph.num_vertices, size=(10, 2)).tolist():
        from_u = bfs_distances(graph, u).astype(np.int64)
        from_v = bfs_distances(graph, v).astype(np.int64)
        assert np.all(from_u <= from_u[v] + from_v)


@pytest.mark.parametrize('policy', ['independent', 'duplicube', 'identity'])
def test_greedy_dominates_distance(policy):
    """d(u, v) <= greedy length <= alpha(u, v) for every pair of an n = 6 graph."""
    G = build(6, policy, 2)
    for u in range(G.num_vertices):
        dist = bfs_distances(G, u)
        for v in range(G.num_vertices):
            length = greedy_route(G, u, v).length
            assert dist[v] <= length <= alpha(u, v)


def test_greedy_lengths_helper_matches_router(graph):
    lengths = greedy_lengths(graph, 21)
    for v in (0, 21, 100, 511):
        assert lengths[v] == greedy_route(graph, 21, v).length


def test_double_sweep_hypercube():
    """From 0 the sweep finds the antipode at distance n."""
    G = build(7, 'identity', 0)
    assert double_sweep(G, 0) == (7, 0)


def test_sampled_bounds_bracket(graph):
    """The sampled lower bound never exceeds the true diameter."""
    exact = exact_diameter(graph)
    report = diameter_bounds_sampled(graph, num_sources=8, num_pairs=64, seed=5)

    assert report.method is DiameterMethod.SAMPLED_SWEEP
    assert diameter_lower_bound(graph.n) <= exact
    assert report.lower_bound <= exact
    assert report.lower_bound <= report.upper_bound <= graph.n
    assert report.upper_is_heuristic == (report.upper_bound < graph.n)


def test_sampled_bounds_all_sources(graph):
    """Sampling every vertex gives the exact diameter as lower bound."""
    report = diameter_bounds_sampled(graph, num_sources=graph.num_vertices, num_pairs=0, seed=0)
    assert report.lower_bound == exact_diameter(graph)
    assert report.upper_bound == graph.n


def test_sampled_bounds_deterministic(graph):
    """Same sampling seed, same bounds."""
    first = diameter_bounds_sampled(graph, 6, 32, seed=9)
    second = diameter_bounds_sampled(graph, 6, 32, seed=9)
    assert (first.lower_bound, first.upper_bound) == (second.lower_bound, second.upper_bound)


def test_sampled_bounds_large_graph():
    """Sampled bounds work where all-pairs BFS is refused."""
    G = build(18, 'duplicube', 3)
    report = diameter_bounds_sampled(G, num_sources=2, num_pairs=16, seed=1)
    assert 1 <= report.lower_bound <= report.upper_bound <= 18


@pytest.mark.slow
def test_sampled_lower_bound_duplicube_twenty():
    """A radius-4 ball holds far fewer than 2^20 vertices, so the bound reaches 5."""
    G = build(20, 'duplicube', 0)
    report = diameter_bounds_sampled(G, num_sources=2, num_pairs=16, seed=0)
    assert report.lower_bound >= 5
    assert report.lower_bound >= diameter_lower_bound(20)
    assert report.upper_bound <= 20


@pytest.mark.slow
@pytest.mark.parametrize('n', range(9, 13))
def test_hypercube_diameter_at_scale(n):
    """Identity diameters for the larger desk-scale dimensions."""
    assert exact_diameter(build(n, 'identity', 0)) == n


@pytest.mark.slow
@pytest.mark.parametrize('n', range(4, 15))
@pytest.mark.parametrize('policy', ['independent', 'duplicube'])
def test_diameter_sandwich(n, policy):
    """Every exact diameter sits between the counting bound and n."""
    for seed in range(5):
        d = exact_diameter(build(n, policy, seed))
        assert diameter_lower_bound(n) <= d <= n


@pytest.mark.slow
@pytest.mark.parametrize('n', [8, 10])
@pytest.mark.parametrize('policy', ['independent', 'duplicube'])
def test_greedy_dominates_distance_at_scale(n, policy):
    """Exhaustive over all pairs: BFS distance <= greedy length <= alpha."""
    G = build(n, policy, 3)
    targets = np.arange(G.num_vertices, dtype=np.int64)
    for u in range(G.num_vertices):
        lengths = greedy_lengths(G, u)
        assert np.all(bfs_distances(G, u) <= lengths)
        assert np.all(lengths <= alpha_array(u, targets))
