import numpy as np
import pytest
from hypothesis import given, strategies as st

from heavytail import network, risksets
from heavytail.errors import CapacityError, ValidationError


def test_rect_membership_and_delta():
    C = risksets.rect_union(3, 2, [{0: 1.0, 1: 2.0}, {1: 1.0, 2: 3.0}])
    assert risksets.contains(C, [1.5, 2.5, 0.0])
    assert not risksets.contains(C, [1.5, 1.5, 0.0])
    assert risksets.contains(C, [0.0, 1.5, 3.5])
    assert risksets.delta(C) == 1.0
    assert risksets.delta(network.dk_set(5, 3, 2.0)) == 2.0


def test_scale():
    C = network.dk_set(3, 2)
    D = risksets.scale(C, 10)
    assert risksets.contains(D, [11, 11, 0]) and not risksets.contains(D, [9, 11, 9])
    H = risksets.scale(network.ordered_chain(), 4)
    assert H.declared_delta == 4 and risksets.contains(H, [7, 6, 5])
    with pytest.raises(ValidationError):
        risksets.scale(C, 0)


def test_rect_validation():
    with pytest.raises(ValidationError):
        risksets.rect_union(3, 2, [{0: 1.0}])
    with pytest.raises(ValidationError):
        risksets.rect_union(3, 1, [{0: 0.0}])
    with pytest.raises(ValidationError):
        risksets.rect_union(3, 4, [{0: 1.0}])
    with pytest.raises(ValidationError):
        risksets.halfspace_union(2, 1, [([[1, 0]], [1])], 0.0)


def test_halfspace_audit_rejects_overstated_delta():
    ok = network.ordered_chain(1.0)
    assert risksets.delta(ok) == 1.0
    bad = risksets.halfspace_union(3, 3, [([[1, -1, 0], [0, 1, -1], [0, 0, 1]], [0, 0, 1])], 2.0)
    with pytest.raises(ValidationError):
        risksets.delta(bad)


def test_inclusion_exclusion_capacity():
    with pytest.raises(CapacityError):
        risksets.inclusion_exclusion(list(range(21)), lambda a, b: a)


clause = st.dictionaries(st.integers(0, 3), st.sampled_from([0.5, 1.0, 2.0]), min_size=2, max_size=4)


@given(st.lists(clause, min_size=1, max_size=5))
def test_disjointify_reproduces_indicator(clauses):
    C = risksets.rect_union(4, 2, clauses)
    X = np.random.default_rng(0).choice([0.25, 0.75, 1.5, 3.0], size=(300, 4))
    total = np.zeros(len(X))
    for w, c in risksets.disjointify(C):
        total += w * np.all(X[:, list(c.coords)] > np.asarray(c.gamma), axis=1)
    np.testing.assert_array_equal(total, risksets.contains_many(C, X).astype(float))


@given(st.lists(clause, min_size=1, max_size=4))
def test_sampled_points_are_members(clauses):
    C = risksets.rect_union(4, 2, clauses)
    pts = risksets.sample_points(C, 200, 1)
    assert len(pts) > 0
    assert risksets.contains_many(C, pts).all()
    assert (-np.sort(-pts, axis=1)[:, 1] >= risksets.delta(C)).all()
