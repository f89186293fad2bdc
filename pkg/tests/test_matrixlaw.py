from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from heavytail import matrixlaw, network
from heavytail.errors import CapacityError, ValidationError


def test_taylor_partition_exact():
    rep = matrixlaw.partition(network.taylor27_law(), 3)
    assert rep.masses == {1: Fraction(5, 9), 2: Fraction(4, 9)}
    assert rep.i_star == 1
    assert rep.per_atom[:15] == [1] * 15 and rep.per_atom[15:] == [2] * 12


def test_probabilities_accept_strings():
    assert matrixlaw.as_number("1/3") == Fraction(1, 3)
    assert isinstance(matrixlaw.as_number(0.25), float)
    with pytest.raises(ValidationError):
        matrixlaw.as_number(True)


def test_bernoulli_conditioning():
    law = matrixlaw.bernoulli([["1/2", "1/2"], ["1/2", "1/2"]])
    sup = matrixlaw.enumerate_support(law)
    assert len(sup) == 9
    assert all(p == Fraction(1, 9) for _, p in sup)
    rep = matrixlaw.validate(law)
    assert rep.ok and rep.conditioning_probability == Fraction(9, 16)


def test_onehot_enumeration():
    law = network.build_onehot_law(4, 3, "own-index")
    sup = matrixlaw.enumerate_support(law)
    assert len(sup) == 2 * 2 * 2 * 3
    assert sum(p for _, p in sup) == 1
    for A, _ in sup:
        assert ((A > 0).sum(axis=1) == 1).all()
        assert all(A[r, r] == 0 for r in range(3))


def test_validation_failures():
    rep = matrixlaw.validate(matrixlaw.explicit([([[1, 0], [0, 0]], "1/2"), ([[1, 1], [1, 1]], "1/3")]))
    assert not rep.ok
    assert any("trivial row" in f for f in rep.failures)
    assert any("sum to" in f for f in rep.failures)
    assert rep.moment_condition.startswith("finite")
    with pytest.raises(ValidationError):
        matrixlaw.require_valid(matrixlaw.bernoulli([[0, 0], [1, 1]]))
    with pytest.raises(ValidationError):
        matrixlaw.explicit([([[1]], 1), ([[1, 1]], 0)])


def test_large_support_falls_back_to_sampling():
    law = matrixlaw.bernoulli([["1/2"] * 5 for _ in range(5)])
    with pytest.raises(CapacityError):
        matrixlaw.enumerate_support(law)
    rep = matrixlaw.partition(law, 5, seed=1)
    assert rep.stderr is not None
    assert sum(rep.masses.values()) == pytest.approx(1.0)
    for i, (lo, hi) in rep.intervals.items():
        assert lo <= rep.masses[i] <= hi


def test_sampling_frequencies(rng):
    law = network.taylor27_law()
    idx = matrixlaw.sample_atom_indices(law, rng, 270_000)
    counts = np.bincount(idx, minlength=27) / len(idx)
    assert np.max(np.abs(counts - 1 / 27)) < 0.002
    mats = matrixlaw.sample_matrices(matrixlaw.bernoulli([[0.3, 0.3], [0.9, 0.1]]), rng, 20_000)
    assert (mats.sum(axis=2) > 0).all()


@given(st.lists(st.integers(1, 9), min_size=2, max_size=6))
def test_partition_masses_sum_to_one(weights):
    total = sum(weights)
    atoms = [(np.eye(3)[[(m + r) % 3 for r in range(3)]] + (m % 2) * np.eye(3)[[0, 0, 0]],
              Fraction(w, total)) for m, w in enumerate(weights)]
    law = matrixlaw.explicit(atoms)
    for k in (1, 2, 3):
        rep = matrixlaw.partition(law, k)
        assert sum(rep.masses.values()) == 1
        assert rep.masses[rep.i_star] > 0
