import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from containment.cascades import (
    CascadeSystem,
    PriorityProfile,
    induce_lower_priority,
    induce_upper_priority,
    make_priority_profile,
)
from containment.errors import ValidationError


def three_cascades():
    # M1 = 0, P1 = 1, P* = 2
    return CascadeSystem.build([[0]], [[1]])


def five_cascades():
    # cascades: M1=0, M2=1, P1=2, P2=3, P3=4 (new), order P3 < P1 < M2 < P2 < M1
    system = CascadeSystem(("M", "M", "P", "P", "P"), ([0], [1], [2], [3], []), 4)
    rank = np.array([[5, 3, 2, 4, 1]])
    return system, PriorityProfile(rank)


def order_names(profile, names=("M1", "M2", "P1", "P2", "P3")):
    return [names[c] for c in profile.order_at(0)]


def test_build_layout():
    s = CascadeSystem.build([[0, 1]], [[2], [3]])
    assert s.groups == ("M", "P", "P", "P")
    assert s.star_id == 3
    assert s.existing_seed_nodes() == frozenset({0, 1, 2, 3})
    assert s.misinfo_seed_nodes() == frozenset({0, 1})


def test_star_must_be_positive_and_unseeded():
    with pytest.raises(ValidationError):
        CascadeSystem(("M", "M"), ([0], []), 1)
    with pytest.raises(ValidationError):
        CascadeSystem(("M", "P"), ([0], [1]), 1)


def test_rank_table_must_be_permutations():
    with pytest.raises(ValidationError):
        PriorityProfile([[1, 1, 2]])
    with pytest.raises(ValidationError):
        make_priority_profile("explicit", three_cascades(), 1, table=[[1, 2, 4]])


def test_m_dominant_profile():
    s = three_cascades()
    p = make_priority_profile("m_dominant", s, 5)
    assert np.all(p.rank[:, 0] > p.rank[:, 1])
    assert np.all(p.rank[:, 0] > p.rank[:, 2])
    assert "m_dominant" in p.classes(s)


def test_homogeneous_profile():
    s = three_cascades()
    p = make_priority_profile("homogeneous", s, 6, perm=[2, 3, 1])
    assert p.is_homogeneous()
    assert np.all(p.rank == p.rank[0])


def test_random_profile_reproducible():
    s = three_cascades()
    a = make_priority_profile("random", s, 50, seed=11)
    b = make_priority_profile("random", s, 50, seed=11)
    c = make_priority_profile("random", s, 50, seed=12)
    assert a == b
    assert a != c


def test_induce_upper_five_cascades():
    s, p = five_cascades()
    up = induce_upper_priority(p, s)
    assert order_names(up) == ["M2", "M1", "P3", "P1", "P2"]
    assert up.is_p_dominant(s)


def test_induce_lower_five_cascades():
    s, p = five_cascades()
    lo = induce_lower_priority(p, s)
    assert order_names(lo) == ["P3", "P1", "P2", "M2", "M1"]
    assert lo.is_m_dominant(s)


def test_upper_fixed_point_when_p_dominant():
    s = three_cascades()
    p = make_priority_profile("p_dominant", s, 4)
    assert induce_upper_priority(p, s) == p


def test_lower_fixed_point_when_m_dominant():
    s = three_cascades()
    p = make_priority_profile("m_dominant", s, 4)
    assert induce_lower_priority(p, s) == p


def test_no_misinfo_is_identity_for_upper():
    s = CascadeSystem.build([], [[0]])
    p = PriorityProfile([[2, 1], [1, 2]])
    assert induce_upper_priority(p, s) == p


def test_single_positive_cascade_lower():
    s = CascadeSystem(("M", "M", "P"), ([0], [1], []), 2)
    p = PriorityProfile([[1, 3, 2]])
    lo = induce_lower_priority(p, s)
    assert lo.rank.tolist() == [[2, 3, 1]]


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 4), st.integers(0, 3), st.integers(1, 6), st.integers(0, 10_000))
def test_induce_idempotent_and_order_preserving(n_m, n_p, n, seed):
    s = CascadeSystem.build([[i] for i in range(n_m)], [[n_m + i] for i in range(n_p)])
    p = make_priority_profile("random", s, n, seed=seed)
    for induce in (induce_upper_priority, induce_lower_priority):
        q = induce(p, s)
        assert induce(q, s) == q
        for group in (s.m_ids, s.p_ids):
            for v in range(n):
                before = np.argsort(p.rank[v, group])
                after = np.argsort(q.rank[v, group])
                assert np.array_equal(before, after)
    assert induce_upper_priority(p, s).is_p_dominant(s)
    assert induce_lower_priority(p, s).is_m_dominant(s)
