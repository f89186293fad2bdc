from fractions import Fraction
from itertools import combinations

import pytest
from hypothesis import given, strategies as st

from heavytail import network
from heavytail.errors import ValidationError


@pytest.mark.parametrize("q,d", [(3, 3), (4, 3), (5, 3), (5, 4), (6, 4)])
def test_delta_closed_form_exact_up_to_three(q, d):
    masses = network.used_column_masses(network.build_onehot_law(q, d, "own-index"))
    for i in range(2, d + 1):
        exact = network.delta_exact(q, d, i)
        for S in combinations(range(d), i):
            assert masses.get(S, Fraction(0)) == exact
        if i <= 3:
            assert network.delta_coeff(q, d, i) == exact


def test_delta_closed_form_breaks_at_four():
    assert network.delta_coeff(4, 4, 4) == Fraction(-5, 27)
    assert network.delta_exact(4, 4, 4) == Fraction(1, 9)


def test_own_index_checks_pass_for_three_columns():
    for q in (4, 5):
        assert all(c.matches for c in network.own_index_checks(q, 3))


def test_pair_mass():
    rep = network.pair_mass_report(5, 3)
    assert rep.enumerated == Fraction(1, 9)
    assert "(d-1)^d form" in rep.matching and "(d-1)^q form" not in rep.matching
    assert "enumerated 1/9" in rep.text()


@pytest.mark.parametrize("d", [4, 5])
def test_window_closed_form_is_containment_probability(d):
    for i in range(2, d + 1):
        for S in combinations(range(d), i):
            assert network.window_within(d, 1, S) == network.q_coeff(d, 1, i)


@pytest.mark.parametrize("d,m", [(4, 1), (5, 1), (5, 2), (5, 3)])
def test_window_exact_matches_enumeration(d, m):
    masses = network.used_column_masses(network.build_onehot_law(d, d, ("window", m)))
    assert sum(masses.values()) == 1
    for i in range(1, d + 1):
        for S in combinations(range(d), i):
            assert network.window_exact(d, m, S) == masses.get(S, Fraction(0))


def test_window_differences_do_not_match():
    checks = {c.label: c for c in network.window_checks(4, 1)}
    assert checks["d=4 m=1 i=2"].matches
    assert not checks["d=4 m=1 i=3"].matches
    assert set(checks["d=4 m=1 i=3"].enumerated.values()) == {Fraction(4, 27)}


def test_laws_validate():
    with pytest.raises(ValidationError):
        network.build_onehot_law(2, 3, "own-index")
    with pytest.raises(ValidationError):
        network.build_onehot_law(4, 4, ("window", 4))
    with pytest.raises(ValidationError):
        network.build_onehot_law(4, 4, "nearest")


def test_sets():
    C = network.dk_set(5, 2, 3.0)
    assert len(C.clauses) == 10 and C.k == 2
    with pytest.raises(ValidationError):
        network.dk_set(3, 4)
    assert network.upper_orthant(3, [1, 2, 3]).clauses[0].gamma == (1, 2, 3)


def test_scenarios():
    for name in network.SCENARIOS:
        sc = network.scenario(name)
        assert sc.models and sc.sets
    sc = network.scenario("det-independent")
    assert sc.expected[("independent", "D2")] == (1, 6)
    assert network.scenario("det-independent", kappa=(1, 1, 1)).expected == {}
    assert network.scenario("prop41").expected[("independent", "orthant")] == (2, pytest.approx(1 / 3))
    with pytest.raises(ValidationError):
        network.scenario("nope")


def test_figure_data():
    rows = network.figure3_data(1)
    assert len(rows) == len(network.FIG3_GRID) * 5
    byset = {(t, s): (a, b) for t, s, a, b in rows}
    assert byset[(20, "D5")] == (pytest.approx(6 / 20 ** 3), pytest.approx(36 / 20 ** 4))
    assert byset[(50, "D2")][0] == pytest.approx(8 / 50)
    with pytest.raises(ValidationError):
        network.figure3_data(3)


@given(st.integers(3, 6), st.data())
def test_own_index_rows_avoid_their_column(q, data):
    d = data.draw(st.integers(2, min(q, 4)))
    for r, allowed in enumerate(network.own_index_allowed(q, d)):
        assert (r not in allowed) if r < d else allowed == list(range(d))
