"""Agent/object exposure networks and their canned scenarios.

Agents (rows) hold exposures X = AZ to objects (columns). The one-hot
families pick one object per agent uniformly from an allowed list; the
deterministic five-agent network mixes single and double exposures.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations

import numpy as np

from . import risksets
from .errors import ValidationError
from .margins import dependent_pareto, iid_pareto
from .matrixlaw import enumerate_support, explicit, onehot, point_mass

# -- laws ------------------------------------------------------------------


def own_index_allowed(q: int, d: int):
    return [[c for c in range(d) if c != r] if r < d else list(range(d)) for r in range(q)]


def window_allowed(d: int, m: int):
    return [[c for c in range(d) if (c - r) % d >= m] for r in range(d)]


def build_onehot_law(q: int, d: int, rule):
    """``rule`` is "own-index" or ("window", m)."""
    if rule == "own-index":
        if not q >= d >= 2:
            raise ValidationError("own-index laws need q >= d >= 2")
        return onehot(q, d, own_index_allowed(q, d))
    if isinstance(rule, (tuple, list)) and len(rule) == 2 and rule[0] == "window":
        m = int(rule[1])
        if q != d or not 1 <= m <= d - 1:
            raise ValidationError("window laws need q = d and 1 <= m <= d-1")
        return onehot(q, d, window_allowed(d, m))
    raise ValidationError(f"unknown one-hot rule {rule!r}")


# -- closed forms ----------------------------------------------------------


def delta_coeff(q: int, d: int, i: int) -> Fraction:
    """The two-term closed form for P(exactly columns S used), |S| = i."""
    if not 2 <= i <= d <= q:
        raise ValidationError("need 2 <= i <= d <= q")
    F = Fraction
    first = F(i - 1, d - 1) ** i * F(i, d - 1) ** (d - i) * F(i, d) ** (q - d)
    second = i * F(i - 2, d - 1) ** (i - 1) * F(i - 1, d - 1) ** (d + 1 - i) * F(i - 1, d) ** (q - d)
    return first - second


def _own_index_within(q, d, j):
    # P(all used columns lie in a fixed j-set) for the own-index law
    F = Fraction
    return F(j - 1, d - 1) ** j * F(j, d - 1) ** (d - j) * F(j, d) ** (q - d)


def delta_exact(q: int, d: int, i: int) -> Fraction:
    """Full inclusion-exclusion version of delta_coeff; exact for every i."""
    if not 1 <= i <= d <= q:
        raise ValidationError("need 1 <= i <= d <= q")
    return sum(((-1) ** (i - j) * math.comb(i, j) * _own_index_within(q, d, j)
                for j in range(1, i + 1)), Fraction(0))


def q_coeff(d: int, m: int, i: int) -> Fraction:
    """Closed form for the window family, as a rational."""
    if not m + 1 <= i <= d:
        raise ValidationError("need m+1 <= i <= d")
    F = Fraction
    num = F(i) ** (d - (i + m - 1)) * F(i - m) ** (i - m + 1)
    for l in range(1, m):
        num *= F(i - l) ** 2
    return num / F(d - m) ** d


def window_within(d: int, m: int, S) -> Fraction:
    """P(all used columns lie in S) for the window law."""
    S = set(S)
    out = Fraction(1)
    for allowed in window_allowed(d, m):
        out *= Fraction(len(S.intersection(allowed)), d - m)
    return out


def window_exact(d: int, m: int, S) -> Fraction:
    """P(exactly the columns in S are used) for the window law."""
    S = tuple(sorted(S))
    total = Fraction(0)
    for j in range(len(S) + 1):
        for T in combinations(S, j):
            total += (-1) ** (len(S) - j) * window_within(d, m, T)
    return total


def used_column_masses(law) -> dict:
    """Enumerated P(set of used columns = S) for every S with positive mass."""
    out: dict = {}
    for A, p in enumerate_support(law):
        S = tuple(int(c) for c in np.flatnonzero((A > 0).any(axis=0)))
        out[S] = out.get(S, 0) + p
    return out


@dataclass
class ConstantCheck:
    label: str
    closed_form: Fraction
    enumerated: dict  # subset -> mass
    matches: bool


def own_index_checks(q: int, d: int):
    """Closed form per-subset masses against enumeration, i = 2..d."""
    masses = used_column_masses(build_onehot_law(q, d, "own-index"))
    out = []
    for i in range(2, d + 1):
        closed = delta_coeff(q, d, i)
        per = {S: masses.get(S, Fraction(0)) for S in combinations(range(d), i)}
        out.append(ConstantCheck(f"q={q} d={d} i={i}", closed, per,
                                 all(v == closed for v in per.values())))
    return out


def window_checks(d: int, m: int):
    """q_i - q_{i-1} (with q_m taken as 0) against enumerated subset masses."""
    masses = used_column_masses(build_onehot_law(d, d, ("window", m)))
    out = []
    for i in range(m + 1, d + 1):
        prev = q_coeff(d, m, i - 1) if i - 1 >= m + 1 else Fraction(0)
        closed = q_coeff(d, m, i) - prev
        per = {S: masses.get(S, Fraction(0)) for S in combinations(range(d), i)}
        out.append(ConstantCheck(f"d={d} m={m} i={i}", closed, per,
                                 all(v == closed for v in per.values())))
    return out


@dataclass
class PairMassReport:
    q: int
    d: int
    enumerated: Fraction
    from_delta: Fraction
    d_power_form: Fraction  # (d-1)^d in the denominator
    q_power_form: Fraction  # (d-1)^q in the denominator
    matching: list

    def text(self) -> str:
        names = ", ".join(self.matching) or "none"
        return (f"pair mass q={self.q} d={self.d}: enumerated {self.enumerated}; "
                f"2^(q-2)/((d-1)^d d^(q-d)) = {self.d_power_form}; "
                f"2^(q-2)/((d-1)^q d^(q-d)) = {self.q_power_form}; matches: {names}")


def pair_mass_report(q: int, d: int) -> PairMassReport:
    """Which closed form for the two-column mass agrees with enumeration."""
    masses = used_column_masses(build_onehot_law(q, d, "own-index"))
    enumerated = masses.get((0, 1), Fraction(0))
    d_form = Fraction(2 ** (q - 2), (d - 1) ** d * d ** (q - d))
    q_form = Fraction(2 ** (q - 2), (d - 1) ** q * d ** (q - d))
    from_delta = delta_coeff(q, d, 2)
    matching = [name for name, v in (("(d-1)^d form", d_form), ("(d-1)^q form", q_form),
                                     ("two-term closed form", from_delta)) if v == enumerated]
    return PairMassReport(q, d, enumerated, from_delta, d_form, q_form, matching)


# -- sets ------------------------------------------------------------------


def dk_set(q: int, k: int, threshold: float = 1.0) -> risksets.RiskSet:
    """{x : at least k coordinates exceed threshold}."""
    if not 1 <= k <= q:
        raise ValidationError("need 1 <= k <= q")
    if not threshold > 0:
        raise ValidationError("threshold must be positive")
    return risksets.rect_union(q, k, [{j: threshold for j in J} for J in combinations(range(q), k)])


def upper_orthant(q: int, x=1.0) -> risksets.RiskSet:
    xs = [x] * q if np.isscalar(x) else list(x)
    return risksets.rect_union(q, q, [dict(enumerate(xs))])


def ordered_chain(delta: float = 1.0) -> risksets.RiskSet:
    """{x1 > x2 > x3 > delta}."""
    return risksets.halfspace_union(
        3, 3, [([[1, -1, 0], [0, 1, -1], [0, 0, 1]], [0, 0, delta])], delta)


# -- scenarios -------------------------------------------------------------

TAYLOR27 = [
    [[1, 1], [1, 1], [1, 1]], [[1, 0], [1, 0], [1, 0]], [[0, 1], [0, 1], [0, 1]],
    [[1, 1], [1, 0], [1, 0]], [[1, 0], [1, 1], [1, 0]], [[1, 0], [1, 0], [1, 1]],
    [[1, 1], [0, 1], [0, 1]], [[0, 1], [1, 1], [0, 1]], [[0, 1], [0, 1], [1, 1]],
    [[1, 1], [1, 1], [1, 0]], [[1, 0], [1, 1], [1, 1]], [[1, 1], [1, 0], [1, 1]],
    [[1, 1], [1, 1], [0, 1]], [[0, 1], [1, 1], [1, 1]], [[1, 1], [0, 1], [1, 1]],
    [[1, 1], [1, 0], [0, 1]], [[1, 0], [1, 1], [0, 1]], [[1, 0], [0, 1], [1, 1]],
    [[1, 1], [0, 1], [1, 0]], [[0, 1], [1, 1], [1, 0]], [[0, 1], [1, 0], [1, 1]],
    [[1, 0], [1, 0], [0, 1]], [[0, 1], [1, 0], [1, 0]], [[1, 0], [0, 1], [1, 0]],
    [[0, 1], [0, 1], [1, 0]], [[1, 0], [0, 1], [0, 1]], [[0, 1], [1, 0], [0, 1]],
]

# five agents, three objects; agents 4 and 5 hold two objects each
DET_MATRIX = [[1, 0, 0], [0, 1, 0], [0, 0, 1], [2, 2, 0], [0, 3, 3]]
DET_KAPPA = (1, 2, 3)

EXAMPLE_36 = [[1, 1, 1, 0], [1, 1, 0, 1], [1, 0, 1, 1], [0, 1, 1, 1]]
CIRCULANT = [[1, 1, 0], [0, 1, 1], [1, 0, 1]]


@dataclass
class Scenario:
    name: str
    models: dict
    law: object
    sets: dict
    expected: dict = field(default_factory=dict)  # (model, set) -> (exponent, constant)
    notes: list = field(default_factory=list)


def taylor27_law(probs=None):
    if probs is None:
        probs = [Fraction(1, 27)] * 27
    if len(probs) != 27:
        raise ValidationError("need 27 atom probabilities")
    return explicit(list(zip(TAYLOR27, probs)))


def scenario(name: str, alpha: float = 1.0, kappa=None, probs=None, **params) -> Scenario:
    if name == "taylor27":
        kappa = tuple(kappa or (1, 1))
        law = taylor27_law(probs)
        qm = [p for _, p in law.atoms]
        Q1 = sum(qm[m - 1] for m in (2, 4, 5, 6, 10, 11, 12))
        Q2 = sum(qm[m - 1] for m in (3, 7, 8, 9, 13, 14, 15))
        c1 = float((qm[0] + Q1) * Fraction(kappa[0]) + (qm[0] + Q2) * Fraction(kappa[1]))
        c2 = 0.5 * kappa[0] * kappa[1] * float(qm[15] + qm[18])
        return Scenario(name, {"independent": iid_pareto(alpha, kappa)}, law,
                        {"C1": upper_orthant(3), "C2": ordered_chain()},
                        {("independent", "C1"): (alpha, c1), ("independent", "C2"): (2 * alpha, c2)})
    if name in ("det-independent", "det-dependent"):
        kappa = tuple(kappa or DET_KAPPA)
        law = point_mass(DET_MATRIX)
        sets = {f"D{k}": dk_set(5, k, params.get("threshold", 1.0)) for k in range(1, 6)}
        stated = {"D1": (1, 17), "D2": (1, 6), "D3": (1, 2), "D4": (2, 11), "D5": (3, 6)}
        if name == "det-independent":
            models = {"independent": iid_pareto(alpha, kappa)}
        else:
            models = {"dependent": dependent_pareto(alpha, kappa)}
            stated["D5"] = (4, 36)
        key = next(iter(models))
        expected = {}
        if alpha == 1 and kappa == DET_KAPPA:
            expected = {(key, s): v for s, v in stated.items()}
        return Scenario(name, models, law, sets, expected)
    if name == "prop41":
        q, d = params.get("q", 5), params.get("d", 3)
        kappa = tuple(kappa or (1,) * d)
        law = build_onehot_law(q, d, "own-index")
        K2 = sum(a * b for a, b in combinations(kappa, 2))
        c = float(Fraction(2 ** (q - 2), (d - 1) ** d * d ** (q - d))) * K2
        return Scenario(name, {"independent": iid_pareto(alpha, kappa)}, law,
                        {"orthant": upper_orthant(q)}, {("independent", "orthant"): (2 * alpha, c)})
    if name == "prop42":
        d, m = params.get("d", 4), params.get("m", 1)
        kappa = tuple(kappa or (1,) * d)
        law = build_onehot_law(d, d, ("window", m))
        K = sum(math.prod(c) for c in combinations(kappa, m + 1))
        c = float(q_coeff(d, m, m + 1)) * K
        return Scenario(name, {"independent": iid_pareto(alpha, kappa)}, law,
                        {"orthant": upper_orthant(d)}, {("independent", "orthant"): ((m + 1) * alpha, c)})
    if name == "example-3-8":
        return Scenario(name, {"independent": iid_pareto(alpha, kappa or (1, 1, 1))},
                        point_mass(CIRCULANT), {"C": upper_orthant(3)},
                        {("independent", "C"): (2 * alpha, 3.0)})
    raise ValidationError(f"unknown scenario {name!r}")


SCENARIOS = ("taylor27", "det-independent", "det-dependent", "prop41", "prop42", "example-3-8")

FIG3_GRID = tuple(range(20, 101, 5))


def figure3_data(alpha: float, t_grid=FIG3_GRID):
    """Rows (t, set, independent, dependent) of leading-order approximations."""
    from .asymptotics import expansion, leading_order

    if alpha not in (1, 2):
        raise ValidationError("figure data is defined for alpha in {1, 2}")
    ind = scenario("det-independent", alpha=alpha)
    dep = scenario("det-dependent", alpha=alpha)
    lead = {}
    for sc, key in ((ind, "independent"), (dep, "dependent")):
        model = sc.models[key]
        for s, C in sc.sets.items():
            lead[key, s] = leading_order(expansion(model, sc.law, C, C.k, check_refined=False))
    rows = []
    for t in t_grid:
        for s in ind.sets:
            e1, c1 = lead["independent", s]
            e2, c2 = lead["dependent", s]
            rows.append((t, s, c1 * t ** (-e1), c2 * t ** (-e2)))
    return rows
