import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from containment.errors import ParseError, ValidationError
from containment.graph import (
    ActivityBased,
    DirectedGraph,
    FromFile,
    Uniform,
    WeightedCascade,
    assign_probabilities,
    erdos_renyi,
    load_edge_list,
    parse_probability_mode,
    preferential_attachment,
)


def write(tmp_path, text, name="g.txt"):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_load_two_edges(tmp_path):
    g = load_edge_list(write(tmp_path, "0 1\n1 2"))
    assert g.node_count == 3
    assert g.edge_count == 2
    assert [(u, v) for u, v, _ in g.edges()] == [(0, 1), (1, 2)]


def test_load_activities(tmp_path):
    g = load_edge_list(write(tmp_path, "0 1 5\n0 2 10"))
    assert g.activity.tolist() == [5, 10]


def test_load_probabilities_column(tmp_path):
    g = load_edge_list(write(tmp_path, "0 1 0.25\n1 0 0.5"), third_column="prob")
    assert sorted(g.prob.tolist()) == [0.25, 0.5]
    assert assign_probabilities(g, FromFile()) is g


def test_self_loop_rejected(tmp_path):
    with pytest.raises(ValidationError):
        load_edge_list(write(tmp_path, "0 0"))


def test_malformed_line_names_line_number(tmp_path):
    with pytest.raises(ParseError, match=":3:"):
        load_edge_list(write(tmp_path, "# header\n0 1\n1 two\n"))


def test_negative_activity(tmp_path):
    with pytest.raises(ValidationError):
        load_edge_list(write(tmp_path, "0 1 -3"))


def test_sparse_ids_compacted(tmp_path):
    g = load_edge_list(write(tmp_path, "100 7\n7 42\n"))
    assert g.node_count == 3
    assert g.labels == [100, 7, 42]
    assert [(u, v) for u, v, _ in g.edges()] == [(0, 1), (1, 2)]


def test_undirected_expands_both_arcs(tmp_path):
    g = load_edge_list(write(tmp_path, "0 1\n1 2\n"), directed_flag=False)
    assert g.edge_count == 4


def test_duplicate_edge_rejected():
    with pytest.raises(ValidationError):
        DirectedGraph.from_edges(3, [(0, 1), (0, 1)], p=0.5)


def test_uniform():
    g = assign_probabilities(erdos_renyi(30, 80, seed=1), Uniform(0.1))
    assert np.all(g.prob == 0.1)


def test_weighted_cascade_four_in_edges():
    g = DirectedGraph.from_edges(5, [(i, 4) for i in range(4)] + [(4, 0)])
    g = assign_probabilities(g, WeightedCascade())
    assert g.prob[g.dst == 4].tolist() == [0.25] * 4
    assert g.prob[g.dst == 0].tolist() == [1.0]


@settings(max_examples=30, deadline=None)
@given(st.integers(5, 40), st.integers(1, 5), st.integers(0, 1000))
def test_weighted_cascade_in_sums_to_one(n, m, seed):
    g = assign_probabilities(preferential_attachment(n, min(m, n - 1), seed), WeightedCascade())
    sums = np.bincount(g.dst, weights=g.prob, minlength=n)
    has_in = g.in_degree() > 0
    assert np.allclose(sums[has_in], 1.0, atol=1e-12)


def test_activity_based_max_edge():
    g = DirectedGraph(3, [0, 1], [1, 2], None, [3, 12])
    g = assign_probabilities(g, ActivityBased(0.2, 0.4))
    assert g.prob.tolist() == pytest.approx([0.45, 0.6])


def test_activity_based_all_zero():
    g = DirectedGraph(3, [0, 1], [1, 2], None, [0, 0])
    with pytest.raises(ValidationError):
        assign_probabilities(g, ActivityBased())


def test_activity_mode_bounds():
    with pytest.raises(ValidationError):
        ActivityBased(0.7, 0.4)


def test_parse_probability_modes():
    assert parse_probability_mode("uniform:0.3") == Uniform(0.3)
    assert parse_probability_mode("wc") == WeightedCascade()
    assert parse_probability_mode("activity:0.2:0.4") == ActivityBased(0.2, 0.4)
    assert parse_probability_mode("file") == FromFile()
    with pytest.raises(ParseError):
        parse_probability_mode("bogus")


def test_uniform_range():
    with pytest.raises(ValidationError):
        Uniform(1.5)


def test_csr_views_consistent():
    g = erdos_renyi(20, 60, seed=3)
    for u in range(g.node_count):
        assert sorted(g.out_neighbors(u).tolist()) == sorted(int(v) for a, v, _ in g.edges() if a == u)
    for k in range(g.edge_count):
        e = g.in_eid[k]
        assert g.src[e] == g.in_src[k]
    assert np.array_equal(np.diff(g.in_ptr), g.in_degree())


def test_node_weights_uniform_equals_scaled_outdegree():
    g = assign_probabilities(erdos_renyi(25, 70, seed=2), Uniform(0.1))
    assert np.allclose(g.node_weights(), 0.1 * g.out_degree())


def test_generators_deterministic():
    a = preferential_attachment(100, 3, seed=5)
    b = preferential_attachment(100, 3, seed=5)
    assert np.array_equal(a.src, b.src) and np.array_equal(a.dst, b.dst)
    # both arcs of every undirected edge
    pairs = set(zip(a.src.tolist(), a.dst.tolist()))
    assert all((v, u) in pairs for u, v in pairs)
