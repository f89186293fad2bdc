import math
from itertools import product

import numpy as np
import pytest
from hypothesis import given, strategies as st

from heavytail import margins
from heavytail.errors import UnsupportedModelError, ValidationError


def order_stat_survival_brute(kappa, alpha, i, t):
    u = [min(1.0, k * t ** -alpha) for k in kappa]
    total = 0.0
    for bits in product((0, 1), repeat=len(u)):
        if sum(bits) >= i:
            total += math.prod(p if b else 1 - p for p, b in zip(u, bits))
    return total


def test_construction_checks():
    with pytest.raises(ValidationError):
        margins.iid_pareto(0, (1,))
    with pytest.raises(ValidationError):
        margins.iid_pareto(1, (1, -2))
    with pytest.raises(ValidationError):
        margins.dependent_pareto(1, (1, 2))
    with pytest.raises(ValidationError):
        margins.dependent_pareto(1, (1, 2, 3), rho=0.5)
    with pytest.raises(ValidationError):
        margins.dependent_pareto(1, (1, 2, 3), theta=1.5)


def test_marginal_survival_clamps():
    m = margins.iid_pareto(2, (4,))
    assert margins.marginal_survival(m, 0, 1.0) == 1.0
    assert margins.marginal_survival(m, 0, 4.0) == pytest.approx(0.25)
    with pytest.raises(ValidationError):
        margins.marginal_survival(m, 1, 2.0)


@given(st.lists(st.floats(0.1, 5.0), min_size=1, max_size=6), st.floats(0.5, 3.0), st.data())
def test_order_stat_survival_matches_enumeration(kappa, alpha, data):
    i = data.draw(st.integers(1, len(kappa)))
    t = data.draw(st.floats(0.5, 50.0))
    m = margins.iid_pareto(alpha, kappa)
    assert margins.order_stat_survival(m, i, t) == pytest.approx(
        order_stat_survival_brute(kappa, alpha, i, t), abs=1e-12)


@pytest.mark.parametrize("i,const", [(1, 6.0), (2, 11.0), (3, 6.0)])
def test_iid_tail_constants(i, const):
    m = margins.iid_pareto(1.5, (1, 2, 3))
    law = margins.order_stat_tail(m, i)
    assert law.exponent == 1.5 * i and law.constant == pytest.approx(const)
    t = 1e5
    assert margins.order_stat_survival(m, i, t) * t ** law.exponent == pytest.approx(const, rel=1e-3)


def test_dependent_tail_constants():
    m = margins.dependent_pareto(1, (1, 2, 3))
    law = margins.order_stat_tail(m, 3)
    assert (law.exponent, law.constant) == (4, 36)
    t = 1e4
    assert margins.joint_survival(m, t, t, t) * t ** 4 == pytest.approx(36, rel=1e-3)
    for i, c in ((1, 6), (2, 11)):
        assert margins.order_stat_survival(m, i, t) * t ** i == pytest.approx(c, rel=1e-3)
    with pytest.raises(UnsupportedModelError):
        margins.order_stat_tail(margins.dependent_pareto(1, (1, 2, 3), rho=2), 3)


def test_joint_survival_is_a_distribution():
    m = margins.dependent_pareto(1, (1, 2, 3))
    # at the origin all survivals are one
    assert margins.joint_survival(m, 0.5, 0.5, 0.5) == 1.0
    # pairs are independent: pushing one threshold to its floor gives a product
    assert margins.joint_survival(m, 1.0, 4.0, 9.0) == pytest.approx(1.0 * 0.5 * (1 / 3))
    assert margins.exact_joint_tail(m, 10) == pytest.approx(margins.joint_survival(m, 10, 10, 10))
    with pytest.raises(ValidationError):
        margins.exact_joint_tail(m, 2)


def test_canonical_scaling():
    m = margins.iid_pareto(2, (1, 1, 1))
    b = margins.canonical_scaling(m, 2, 1e6)
    law = margins.order_stat_tail(m, 2)
    assert 1e6 * law.constant * b ** -law.exponent == pytest.approx(1.0)


def test_iid_sampler_margins():
    m = margins.iid_pareto(1.5, (1, 2, 3))
    Z = margins.sample(m, 3, 200_000)
    assert Z.shape == (200_000, 3)
    for j, k in enumerate(m.kappa):
        z = 2.0 * k ** (1 / 1.5)
        p = margins.marginal_survival(m, j, z)
        se = math.sqrt(p * (1 - p) / len(Z))
        assert abs(np.mean(Z[:, j] > z) - p) < 4 * se


@pytest.mark.parametrize("alpha,kappa,rho,theta", [(1, (1, 2, 3), 1, 1), (1.5, (1, 1, 1), 2, 0.7)])
def test_dependent_sampler_joint_survival(alpha, kappa, rho, theta):
    m = margins.dependent_pareto(alpha, kappa, rho, theta)
    Z = margins.sample(m, 11, 400_000)
    n = len(Z)
    for z in [(1.5, 2.5, 3.5), (4.0, 4.0, 4.0), (1.1, 6.0, 3.2)]:
        p = margins.joint_survival(m, *z)
        se = math.sqrt(p * (1 - p) / n)
        assert abs(np.mean((Z > np.array(z)).all(axis=1)) - p) < 4.5 * se
    # pairwise independence of the first two coordinates
    a, b = Z[:, 0] > 2 * kappa[0] ** (1 / alpha), Z[:, 1] > 2 * kappa[1] ** (1 / alpha)
    assert abs(np.mean(a & b) - np.mean(a) * np.mean(b)) < 0.005


def test_sampler_is_reproducible():
    m = margins.dependent_pareto(1, (1, 2, 3))
    np.testing.assert_array_equal(margins.sample(m, 5, 1000), margins.sample(m, 5, 1000))
