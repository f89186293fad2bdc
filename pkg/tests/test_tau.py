from itertools import combinations

import numpy as np
import pytest
from hypothesis import given, strategies as st

from heavytail import network
from heavytail.errors import CapacityError, ValidationError
from heavytail.tau import (TauValue, critical_index, order_stat, tau_matrix,
                           tau_matrix_with_witness, tau_oracle)


def brute_tau(A, k, i, big=1e7):
    """Evaluate (Az)^(k) on the vertices z in {1, L}^d with at most i-1 entries at L.

    The functional is monotone, so the supremum over z^(i) = 1 sits on
    these vertices; doubling L exposes divergence.
    """
    A = np.asarray(A, dtype=float)
    d = A.shape[1]
    best = {}
    for L in (big, 2 * big):
        vals = []
        for c in range(i):
            for S in combinations(range(d), c):
                z = np.ones(d)
                z[list(S)] = L
                vals.append(order_stat(A @ z, k))
        best[L] = max(vals)
    if best[2 * big] > 1.5 * best[big]:
        return None
    return best[big]


def test_order_stat():
    x = [3.0, 1.0, 4.0, 1.5]
    assert [order_stat(x, k) for k in (1, 2, 3, 4)] == [4.0, 3.0, 1.5, 1.0]
    with pytest.raises(ValidationError):
        order_stat(x, 5)


def test_four_by_four_example():
    A = network.EXAMPLE_36
    assert tau_matrix(A, 4, 1) == TauValue(3.0)
    assert tau_matrix(A, 4, 2) == TauValue(3.0)
    assert not tau_matrix(A, 4, 3).finite
    assert critical_index(A, 4)[0] == 2


def test_identity_values():
    I = np.eye(3)
    assert tau_matrix(I, 3, 1).value == 1.0
    # one column covers a single row, so (3, 2) stays finite
    assert tau_matrix(I, 3, 2).value == 1.0
    assert tau_matrix(I, 3, 3).value == 1.0
    assert critical_index(I, 3)[0] == 3


def test_five_agent_matrix():
    A = network.DET_MATRIX
    assert tau_matrix(A, 1, 1).value == 6.0
    assert tau_matrix(A, 2, 1).value == 4.0
    assert not tau_matrix(A, 1, 2).finite
    size, cert = critical_index(A, 4)
    assert size == 2
    assert len(cert.covered_rows) >= 4
    assert [critical_index(A, k)[0] for k in range(1, 6)] == [1, 1, 1, 2, 3]


def test_witness_attains_value():
    A = np.array([[1.0, 0, 0], [0.5, 2, 0], [0, 1, 1], [0, 0, 3]])
    val, mask = tau_matrix_with_witness(A, 3, 2)
    assert val.value == 3.0
    z = np.ones(3)
    z[[j for j in range(3) if mask >> j & 1]] = 1e9
    assert order_stat(A @ z, 3) == pytest.approx(val.value)


def test_string_forms():
    assert str(TauValue(None)) == "INF"
    assert float(TauValue(None)) == float("inf")
    assert TauValue(2.0) <= TauValue(None)
    assert not TauValue(None) <= TauValue(5.0)


def test_validation():
    with pytest.raises(ValidationError):
        tau_matrix([[0, 0], [1, 0]], 1, 1)
    with pytest.raises(ValidationError):
        tau_matrix([[-1, 1]], 1, 1)
    with pytest.raises(ValidationError):
        tau_matrix(np.eye(2), 3, 1)
    with pytest.raises(CapacityError):
        tau_matrix(np.ones((2, 23)), 1, 1)
    with pytest.raises(ValidationError):
        tau_oracle(np.eye(2), 1, 1, budget=10)


def nonneg_matrix(max_q=5, max_d=5):
    return st.integers(1, max_q).flatmap(lambda q: st.integers(1, max_d).flatmap(
        lambda d: st.lists(st.lists(st.sampled_from([0.0, 0.25, 1.0, 3.0]), min_size=d, max_size=d),
                           min_size=q, max_size=q))).map(_fix_rows)


def _fix_rows(rows):
    A = np.asarray(rows)
    A[A.sum(axis=1) == 0, 0] = 1.0
    return A


@given(nonneg_matrix(), st.data())
def test_matches_vertex_enumeration(A, data):
    q, d = A.shape
    k, i = data.draw(st.integers(1, q)), data.draw(st.integers(1, d))
    t = tau_matrix(A, k, i)
    ref = brute_tau(A, k, i)
    if ref is None:
        assert not t.finite
    else:
        assert t.value == pytest.approx(ref)


@given(nonneg_matrix(), st.data())
def test_monotone_in_levels(A, data):
    q, d = A.shape
    k, i = data.draw(st.integers(1, q)), data.draw(st.integers(1, d))
    if i < d:
        assert tau_matrix(A, k, i) <= tau_matrix(A, k, i + 1)
    if k < q:
        assert tau_matrix(A, k + 1, i) <= tau_matrix(A, k, i)


@given(nonneg_matrix(), st.data())
def test_finite_exactly_up_to_critical_index(A, data):
    q, _ = A.shape
    k = data.draw(st.integers(1, q))
    ik, cert = critical_index(A, k)
    assert len(cert.columns) == ik and len(cert.covered_rows) >= k
    for i in range(1, A.shape[1] + 1):
        assert tau_matrix(A, k, i).finite == (i <= ik)


@given(nonneg_matrix(), st.floats(0.1, 10.0), st.data())
def test_homogeneous(A, c, data):
    k, i = data.draw(st.integers(1, A.shape[0])), data.draw(st.integers(1, A.shape[1]))
    t1, t2 = tau_matrix(A, k, i), tau_matrix(c * A, k, i)
    assert t1.finite == t2.finite
    if t1.finite:
        assert t2.value == pytest.approx(c * t1.value)


def test_oracle_is_lower_bound_and_flags_divergence():
    A = network.EXAMPLE_36
    best, div = tau_oracle(A, 4, 2, seed=1)
    assert best <= 3.0 + 1e-9 and best == pytest.approx(3.0)
    assert not div
    assert tau_oracle(A, 4, 3, seed=1)[1]
