"""
Tests for the greedy and twist routers.
"""

import math
import random

import pytest

from twistcube.core import alpha, build
from twistcube.models import RoutePath, RouterParams
from twistcube.routing import (
    ball_bfs,
    default_params,
    greedy_route,
    theoretical_length_bound,
    twist_route,
    validate_path,
)


def random_pairs(n, count, seed=0):
    rng = random.Random(seed)
    return [(rng.randrange(1 << n), rng.randrange(1 << n)) for _ in range(count)]


@pytest.fixture(scope='module')
def graph():
    """A random graph large enough for several twist phases."""
    return build(14, 'independent', 21)


def test_default_params():
    """Test the schedule and its small-n floors."""
    assert default_params(1) == RouterParams(t=2, n0=1)
    assert default_params(2) == RouterParams(t=2, n0=2)
    assert default_params(16) == RouterParams(t=2, n0=1)
    assert default_params(20) == RouterParams(t=2, n0=2)
    assert default_params(1024).n0 == 11

    for n in range(1, 31):
        params = default_params(n)
        assert params.t >= 2
        assert 1 <= params.n0 <= n + 1


def test_theoretical_length_bound():
    """Only defined for t > 2 and n0 > 1."""
    assert theoretical_length_bound(16, RouterParams(t=2, n0=4)) is None
    assert theoretical_length_bound(16, RouterParams(t=3, n0=1)) is None
    assert theoretical_length_bound(16, RouterParams(t=3, n0=4)) == pytest.approx(36.0)


def test_greedy_identity_is_hamming_distance():
    """On the hypercube greedy flips exactly the differing bits."""
    G = build(10, 'identity', 0)
    for u, v in random_pairs(10, 1000):
        path = greedy_route(G, u, v)
        assert path.length == bin(u ^ v).count('1')
        assert validate_path(G, path, u, v)


def test_greedy_same_vertex(graph):
    """Test the trivial route."""
    path = greedy_route(graph, 77, 77)
    assert path.length == 0
    assert path.vertices == [77]
    assert path.alpha_trace == [0]


def test_greedy_random_graph(graph):
    """Greedy lowers alpha on every hop, so it needs at most alpha(u, v) edges."""
    for u, v in random_pairs(graph.n, 300, seed=1):
        path = greedy_route(graph, u, v)
        assert validate_path(graph, path, u, v)
        assert path.length <= alpha(u, v)
        alphas = [alpha(w, v) for w in path.vertices]
        assert all(a > b for a, b in zip(alphas, alphas[1:]))


@pytest.mark.parametrize('policy', ['independent', 'duplicube', 'identity'])
def test_twist_route_contract(policy):
    """Valid paths, strictly decreasing alpha, each phase at most t + 1 edges."""
    G = build(12, policy, 4)
    params = RouterParams(t=3, n0=4)
    for u, v in random_pairs(G.n, 300, seed=2):
        path = twist_route(G, u, v, params)
        assert validate_path(G, path, u, v)

        trace = path.alpha_trace
        assert trace[0] == alpha(u, v)
        assert len(trace) == path.phases + 1
        assert all(a > b for a, b in zip(trace, trace[1:]))
        assert trace[-1] < params.n0
        assert len(path.phase_lengths) == path.phases
        assert all(1 <= length <= params.t + 1 for length in path.phase_lengths)
        assert path.length <= sum(path.phase_lengths) + trace[-1]


def test_twist_default_params(graph):
    """Without explicit params the default schedule is used."""
    for u, v in random_pairs(graph.n, 100, seed=3):
        path = twist_route(graph, u, v)
        assert validate_path(graph, path, u, v)


def test_twist_same_vertex(graph):
    """Test the trivial route."""
    path = twist_route(graph, 5, 5, RouterParams(t=3, n0=2))
    assert path.length == 0
    assert path.phases == 0
    assert path.alpha_trace == [0]


def test_twist_pure_greedy_threshold(graph):
    """n0 = n + 1 hands everything to the greedy walk."""
    params = RouterParams(t=3, n0=graph.n + 1)
    for u, v in random_pairs(graph.n, 50, seed=4):
        path = twist_route(graph, u, v, params)
        assert path.phases == 0
        assert path.vertices == greedy_route(graph, u, v).vertices


def test_twist_rejects_large_threshold(graph):
    """n0 above n + 1 is an error."""
    with pytest.raises(ValueError, match="exceeds n \\+ 1"):
        twist_route(graph, 0, 1, RouterParams(t=3, n0=graph.n + 2))


def test_ball_bfs_hypercube():
    """Balls in the hypercube are Hamming balls."""
    G = build(8, 'identity', 0)
    for t in range(4):
        ball = ball_bfs(G, 0, t, G.n + 1)
        assert len(ball) == sum(math.comb(8, s) for s in range(t + 1))
        assert all(d == bin(w).count('1') for w, d in ball.items())


def test_ball_bfs_respects_cap(graph):
    """Only levels below the cap are used, so higher coordinates stay fixed."""
    center = 0b10110100111001
    for cap in range(1, graph.n + 2):
        ball = ball_bfs(graph, center, 3, cap)
        assert all(d <= 3 for d in ball.values())
        assert all((w >> (cap - 1)) == (center >> (cap - 1)) for w in ball)
    assert ball_bfs(graph, center, 3, 1) == {center: 0}


def test_ball_bfs_errors(graph):
    """Test rejected arguments."""
    with pytest.raises(ValueError, match="cap"):
        ball_bfs(graph, 0, 2, 0)
    with pytest.raises(ValueError, match="cap"):
        ball_bfs(graph, 0, 2, graph.n + 2)
    with pytest.raises(ValueError, match="radius"):
        ball_bfs(graph, 0, -1, 3)


def test_validate_path_rejects_bad_paths(graph):
    """Wrong endpoints or a wrong level invalidate a path."""
    path = greedy_route(graph, 3, 1000)
    assert validate_path(graph, path, 3, 1000)
    assert not validate_path(graph, path, 4, 1000)
    assert not validate_path(graph, path, 3, 1001)

    broken = RoutePath(vertices=list(path.vertices), levels=list(path.levels))
    broken.levels[0] = broken.levels[0] % graph.n + 1
    assert not validate_path(graph, broken, 3, 1000)


@pytest.mark.slow
@pytest.mark.parametrize('n', [12, 16, 20])
@pytest.mark.parametrize('policy', ['independent', 'duplicube'])
def test_router_contract_at_scale(n, policy):
    """Both routers stay valid and the twist phases keep their accounting on many pairs."""
    G = build(n, policy, n)
    params = RouterParams(t=3, n0=max(2, default_params(n).n0))
    for u, v in random_pairs(n, 1700, seed=n):
        greedy = greedy_route(G, u, v)
        twist = twist_route(G, u, v, params)
        assert validate_path(G, greedy, u, v)
        assert validate_path(G, twist, u, v)
        trace = twist.alpha_trace
        assert all(a > b for a, b in zip(trace, trace[1:]))
        assert all(length <= params.t + 1 for length in twist.phase_lengths)
