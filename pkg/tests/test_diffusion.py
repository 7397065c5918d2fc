import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from containment.cascades import CascadeSystem, PriorityProfile, make_priority_profile
from containment.checks import class_profile, random_graph
from containment.diffusion import (
    LiveEdgeGraph,
    evaluate_on_live_graph,
    evaluate_on_live_graph_fast,
    sample_live_edge_graph,
    simulate,
)
from containment.errors import ValidationError
from containment.graph import DirectedGraph
from containment.instances import three_cascade_trace


def test_three_cascade_trace():
    inst = three_cascade_trace()
    out = simulate(inst.graph, inst.system, inst.profile, inst.star_seeds, 0)
    assert out.state.tolist() == [0, 1, 2, 0, 2, 2]
    assert out.activation_time.tolist() == [0, 0, 0, 1, 1, 2]
    assert out.m_active_nodes() == {0, 3}


def test_three_cascade_trace_flipped():
    inst = three_cascade_trace(flip_v4=True)
    out = simulate(inst.graph, inst.system, inst.profile, inst.star_seeds, 0)
    assert out.state[3] == 1
    assert out.state[5] == 1


def test_chain_times():
    g = DirectedGraph.from_edges(3, [(0, 1), (1, 2)], p=1.0)
    s = CascadeSystem.build([[0]])
    prof = make_priority_profile("homogeneous", s, 3)
    out = simulate(g, s, prof, [], 0)
    assert out.activation_time.tolist() == [0, 1, 2]
    assert out.m_active_count == 3


def test_time_zero_rule():
    g = DirectedGraph.from_edges(2, [(0, 1)], p=1.0)
    s = CascadeSystem.build([[0]])
    prof = PriorityProfile([[1, 2], [1, 2]])
    out = simulate(g, s, prof, [0], 0)
    assert out.state.tolist() == [1, 1]
    assert out.m_active_count == 0


def test_unknown_star_seed():
    g = DirectedGraph.from_edges(2, [(0, 1)], p=1.0)
    s = CascadeSystem.build([[0]])
    with pytest.raises(ValidationError):
        simulate(g, s, make_priority_profile("homogeneous", s, 2), [5], 0)


def test_unreached_nodes_have_infinite_time():
    g = DirectedGraph.from_edges(3, [(0, 1)], p=1.0)
    s = CascadeSystem.build([[0]])
    out = simulate(g, s, make_priority_profile("homogeneous", s, 3), [], 0)
    assert math.isinf(out.activation_time[2])
    assert out.state[2] == -1
    assert out.not_m_active_count == 1


def test_live_edge_extremes():
    g = DirectedGraph.from_edges(3, [(0, 1), (1, 2)], p=1.0)
    assert sample_live_edge_graph(g, 0).kept.all()
    g0 = g.with_probabilities([0.0, 0.0])
    assert not sample_live_edge_graph(g0, 0).kept.any()


def test_live_edge_frequency():
    g = DirectedGraph.from_edges(4, [(0, 1), (1, 2), (2, 3)], p=0.5)
    rng = np.random.default_rng(7)
    freq = np.mean([sample_live_edge_graph(g, rng).kept for _ in range(10_000)], axis=0)
    assert np.all(np.abs(freq - 0.5) <= 0.02)


def test_simulate_seed_deterministic():
    g = random_graph(np.random.default_rng(1), 8, 14, (0.5,))
    s = CascadeSystem.build([[0]], [[1]])
    prof = make_priority_profile("random", s, 8, seed=3)
    a = simulate(g, s, prof, [2], 42)
    b = simulate(g, s, prof, [2], 42)
    assert np.array_equal(a.state, b.state)


def equidistant():
    # M seed 0 -> 1 -> 4, positive seed 2 -> 3 -> 4: node 4 is at distance 2 from both
    g = DirectedGraph.from_edges(5, [(0, 1), (1, 4), (2, 3), (3, 4)], p=1.0)
    s = CascadeSystem.build([[0]], [[2]])
    return LiveEdgeGraph(g, np.ones(4, dtype=bool)), s


def test_m_dominant_tie_goes_to_misinfo():
    lg, s = equidistant()
    prof = make_priority_profile("m_dominant", s, 5)
    out = evaluate_on_live_graph_fast(lg, s, "m_dominant", prof, [])
    assert out.m_active[4]


def test_p_dominant_tie_goes_to_positive():
    lg, s = equidistant()
    prof = make_priority_profile("p_dominant", s, 5)
    out = evaluate_on_live_graph_fast(lg, s, "p_dominant", prof, [])
    assert not out.m_active[4]


def test_homogeneous_nearest_higher_rank_wins():
    lg, s = equidistant()
    prof = make_priority_profile("homogeneous", s, 5, perm=[1, 3, 2])
    out = evaluate_on_live_graph_fast(lg, s, "homogeneous", prof, [])
    assert out.state[4] == 1
    ref = simulate(lg.graph, s, prof, [], lg)
    assert np.array_equal(out.state, ref.state)


def test_fast_rejects_wrong_class():
    lg, s = equidistant()
    prof = make_priority_profile("m_dominant", s, 5)
    with pytest.raises(ValidationError):
        evaluate_on_live_graph_fast(lg, s, "p_dominant", prof, [])


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_compiled_step_matches_reference(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 12))
    g = random_graph(rng, n, int(rng.integers(1, 25)), (0.4, 0.8, 1.0))
    s = CascadeSystem.build([[0]], [[1]] if n > 2 else [])
    prof = class_profile("random", s, n, rng)
    star = [n - 1] if n > 2 else []
    lg = sample_live_edge_graph(g, rng)
    ref = simulate(g, s, prof, star, lg)
    fast = evaluate_on_live_graph(lg, s, prof, star)
    assert np.array_equal(ref.state, fast.state)
    assert np.array_equal(ref.activation_time, fast.activation_time)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_activation_time_is_bfs_distance(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 12))
    g = random_graph(rng, n, int(rng.integers(1, 25)), (0.5, 1.0))
    s = CascadeSystem.build([[0]], [[1]] if n > 2 else [])
    prof = class_profile("random", s, n, rng)
    lg = sample_live_edge_graph(g, rng)
    out = simulate(g, s, prof, [], lg)
    # plain BFS over kept edges from every seed
    dist = {v: 0 for v in s.existing_seed_nodes()}
    frontier = list(dist)
    edges = lg.kept_edges()
    while frontier:
        nxt = []
        for u in frontier:
            for a, b in edges:
                if a == u and b not in dist:
                    dist[b] = dist[u] + 1
                    nxt.append(b)
        frontier = nxt
    for v in range(n):
        assert out.activation_time[v] == dist.get(v, math.inf)
