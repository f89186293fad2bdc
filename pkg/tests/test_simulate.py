import math

import numpy as np
import pytest

from heavytail import margins, matrixlaw, network, simulate
from heavytail.errors import ValidationError

IID = margins.iid_pareto(1, (1, 2, 3))
IDENTITY = matrixlaw.point_mass(np.eye(3))

# exact finite-t probabilities for the five-agent network at t = 50, from a
# conditional quadrature (see test_asymptotics.exact_dk)
EXACT_T50 = {"D1": 0.40614, "D3": 0.05144}


def within(est, p, z=4.0):
    return abs(est.p_hat - p) <= z * math.sqrt(p * (1 - p) / est.n)


@pytest.mark.parametrize("k", [1, 2, 3])
def test_identity_matches_order_stat_survival(k):
    est = simulate.empirical_tail(IID, IDENTITY, network.dk_set(3, k), 4.0, 300_000, seed=k)
    assert within(est, margins.order_stat_survival(IID, k, 4.0))


def test_five_agent_network_against_exact():
    sc = network.scenario("det-independent")
    res = simulate.empirical_tails(sc.models["independent"], sc.law,
                                   {s: sc.sets[s] for s in EXACT_T50}, 50.0, 1_000_000, seed=21)
    for s, p in EXACT_T50.items():
        assert within(res[s], p)


def test_seed_reproducible_and_thread_invariant():
    sc = network.scenario("taylor27")
    model = sc.models["independent"]
    sets = [sc.sets["C1"], sc.sets["C2"]]
    a = simulate.count_hits(model, sc.law, sets, 50_000, seed=9, chunk_size=8192, threads=1)
    b = simulate.count_hits(model, sc.law, sets, 50_000, seed=9, chunk_size=8192, threads=3)
    c = simulate.count_hits(model, sc.law, sets, 50_000, seed=10, chunk_size=8192, threads=1)
    assert a == b
    assert a != c


def test_random_laws_are_sampled_per_draw():
    law = matrixlaw.bernoulli([["1/2", "1/2"], ["1/2", "1/2"]])
    model = margins.iid_pareto(1, (1, 1))
    est = simulate.empirical_tail(model, law, network.upper_orthant(2), 3.0, 100_000, seed=1)
    assert 0 < est.p_hat < 1


def test_wilson_interval_for_rare_hits():
    est = simulate.mc_estimate(0, 10_000, seed=0)
    assert est.ci95[0] == 0.0 and est.ci95[1] > 0
    est = simulate.mc_estimate(20, 10_000, seed=0)
    assert est.ci95[0] > 0 and est.ci95[0] < est.p_hat < est.ci95[1]
    big = simulate.mc_estimate(5000, 10_000, seed=0)
    assert big.ci95 == pytest.approx((0.5 - 1.96 * big.stderr, 0.5 + 1.96 * big.stderr))


def test_ratio_table_is_monotone():
    sc = network.scenario("example-3-8")
    rows = simulate.ratio_table(sc.models["independent"], sc.law, sc.sets["C"], [2, 5, 10, 20], 200_000, seed=3)
    p = [r.p_hat for r in rows]
    assert p == sorted(p, reverse=True)
    assert rows[-1].leading_eval == pytest.approx(3 / 400)
    assert 0.6 < rows[-1].ratio_leading < 1.4


def test_strata_add_up():
    sc = network.scenario("taylor27")
    model = sc.models["independent"]
    strata = simulate.stratified_tail(model, sc.law, sc.sets["C1"], 3.0, 200_000, seed=4)
    assert [s.i for s in strata] == [1, 2]
    total = sum(s.estimate for s in strata)
    direct = simulate.empirical_tail(model, sc.law, sc.sets["C1"], 3.0, 400_000, seed=5)
    se = math.hypot(math.sqrt(sum(s.stderr ** 2 for s in strata)), direct.stderr)
    assert abs(total - direct.p_hat) < 4 * se


def test_input_checks():
    with pytest.raises(ValidationError):
        simulate.empirical_tail(IID, IDENTITY, network.dk_set(3, 1), 2.0, 100, seed=0)
    with pytest.raises(ValidationError):
        simulate.count_hits(IID, IDENTITY, [network.dk_set(4, 1)], 1000, seed=0)
    with pytest.raises(ValidationError):
        simulate.ratio_table(IID, IDENTITY, network.dk_set(3, 1), [], 10_000, seed=0)
