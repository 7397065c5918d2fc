import numpy as np
import pytest

from containment.cascades import CascadeSystem, make_priority_profile
from containment.checks import class_profile, random_small_instance
from containment.errors import CapacityError
from containment.estimation import (
    EstimatorConfig,
    LiveGraphEnsemble,
    estimate,
    exact_f,
    replication_mask,
)
from containment.graph import DirectedGraph
from containment.instances import non_submodular_witness


def single_edge():
    g = DirectedGraph.from_edges(2, [(0, 1)], p=0.5)
    s = CascadeSystem.build([[0]])
    return g, s, make_priority_profile("homogeneous", s, 2)


def test_no_edges_no_misinfo():
    g = DirectedGraph.from_edges(4, [])
    s = CascadeSystem.build([], [])
    est = estimate(g, s, make_priority_profile("homogeneous", s, 4), [2], EstimatorConfig(200))
    assert est.mean_not_m_active == 4
    assert est.std_error == 0


def test_single_edge_exact():
    g, s, prof = single_edge()
    assert exact_f(g, s, prof, []) == (1.5, 0.5)


def test_single_edge_monte_carlo():
    g, s, prof = single_edge()
    est = estimate(g, s, prof, [], EstimatorConfig(100_000, base_seed=3))
    assert abs(est.mean_m_active - 1.5) <= 3 * est.std_error
    assert est.mean_m_active + est.mean_not_m_active == pytest.approx(2, abs=1e-12)


def test_deterministic_graph_estimate_equals_exact():
    w = non_submodular_witness()
    f_m, _ = exact_f(w.graph, w.system, w.profile, [1])
    for R in (1, 17):
        est = estimate(w.graph, w.system, w.profile, [1], EstimatorConfig(R))
        assert est.mean_m_active == f_m


def test_exact_weights_sum_to_one():
    inst = random_small_instance(np.random.default_rng(4))
    ens = LiveGraphEnsemble.exhaustive(inst.graph)
    assert ens.weights.sum() == pytest.approx(1.0, abs=1e-9)


def test_exact_capacity_guard():
    g = DirectedGraph.from_edges(22, [(i, i + 1) for i in range(21)], p=0.5)
    s = CascadeSystem.build([[0]])
    with pytest.raises(CapacityError, match="20"):
        exact_f(g, s, make_priority_profile("homogeneous", s, 22), [])


def test_exact_sum_identity():
    rng = np.random.default_rng(9)
    for _ in range(10):
        inst = random_small_instance(rng)
        prof = class_profile("random", inst.system, inst.graph.node_count, rng)
        f_m, f_not = exact_f(inst.graph, inst.system, prof, inst.candidates[:2])
        assert f_m + f_not == pytest.approx(inst.graph.node_count, abs=1e-9)


def test_replication_stream_independent_of_seeds():
    g = DirectedGraph.from_edges(5, [(i, i + 1) for i in range(4)], p=0.5)
    assert np.array_equal(replication_mask(g, 1, 7), replication_mask(g, 1, 7))
    assert not all(np.array_equal(replication_mask(g, 1, r), replication_mask(g, 1, 7)) for r in range(6))


def test_evaluators_agree():
    rng = np.random.default_rng(5)
    for kind in ("m_dominant", "p_dominant", "homogeneous"):
        inst = random_small_instance(rng)
        prof = class_profile(kind, inst.system, inst.graph.node_count, rng)
        star = inst.candidates[:2]
        vals = [
            estimate(inst.graph, inst.system, prof, star, EstimatorConfig(500, evaluator=e)).mean_m_active
            for e in ("step_simulation", "fast_bfs", "reference", "auto")
        ]
        assert len(set(vals)) == 1


def test_crn_sink_node_gain():
    # node 2 has no out-edges: seeding it only changes its own state, so on shared
    # live graphs the gain is exactly the share of replications where it was M-active
    g = DirectedGraph.from_edges(3, [(0, 1), (1, 2)], p=0.5)
    s = CascadeSystem.build([[0]])
    prof = make_priority_profile("homogeneous", s, 3)
    cfg = EstimatorConfig(1000, base_seed=2)
    a = estimate(g, s, prof, [], cfg)
    b = estimate(g, s, prof, [2], cfg)
    masks = LiveGraphEnsemble.monte_carlo(g, 1000, 2).masks
    reached = masks.all(axis=1).mean()
    assert b.mean_not_m_active - a.mean_not_m_active == pytest.approx(reached, abs=1e-12)


def test_crn_off_uses_other_streams():
    g, s, prof = single_edge()
    on = estimate(g, s, prof, [], EstimatorConfig(50, common_random_numbers=True))
    off = estimate(g, s, prof, [], EstimatorConfig(50, common_random_numbers=False))
    again = estimate(g, s, prof, [], EstimatorConfig(50, common_random_numbers=False))
    assert off == again
    assert on.replications == off.replications


def test_standard_error_scaling():
    inst = random_small_instance(np.random.default_rng(12))
    prof = class_profile("random", inst.system, inst.graph.node_count, np.random.default_rng(1))
    small = estimate(inst.graph, inst.system, prof, [], EstimatorConfig(2500))
    big = estimate(inst.graph, inst.system, prof, [], EstimatorConfig(10_000))
    assert 0.4 <= big.std_error / small.std_error <= 0.6
