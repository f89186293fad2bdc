"""Tail expansions P(AZ in tC) ~ sum_i c_i t^(-e_i)."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog

from . import risksets
from .errors import HeavyTailError, ValidationError
from .margins import order_stat_tail
from .matrixlaw import enumerate_support, partition
from .measure import ANALYTIC, DEFAULT_MC, at_level, expected_preimage_measure

PROBE_POINTS = 100_000
PROBE_AMPLITUDE = 1e6
LP_EMPTY_TOL = 1e-12
LP_NONEMPTY_TOL = 1e-9


@dataclass(frozen=True)
class Term:
    i: int
    exponent: float
    coefficient: float
    stderr: float
    method: str

    @property
    def resolved(self) -> bool:
        """Positive and distinguishable from zero."""
        if self.coefficient <= 0:
            return False
        return self.method != "montecarlo" or self.coefficient > 3 * self.stderr


@dataclass
class TailExpansion:
    terms: list
    k: int
    i_star: int
    iota_bar: int
    refined_valid: bool = False
    checks: dict = field(default_factory=dict)


class NoResolvableOrder(HeavyTailError):
    pass


def expansion(model, law, C, k: int, n: int = DEFAULT_MC, seed=0,
              check_refined: bool = True) -> TailExpansion:
    if law.d != model.d:
        raise ValidationError(f"law has {law.d} columns but the margins have d={model.d}")
    if law.q != C.dim:
        raise ValidationError(f"law has {law.q} rows but the set lives in dimension {C.dim}")
    C = at_level(C, k)
    rep = partition(law, k)
    terms = []
    for i in range(rep.i_star, model.d + 1):
        tail = order_stat_tail(model, i)
        if rep.masses[i] == 0:
            terms.append(Term(i, tail.exponent, 0.0, 0.0, ANALYTIC))
            continue
        est = expected_preimage_measure(model, law, C, k, i, n=n, seed=(seed, i))
        terms.append(Term(i, tail.exponent, tail.constant * est.mass,
                          tail.constant * est.stderr, est.method))
    positive = [t.i for t in terms if t.resolved]
    iota = positive[0] if positive else model.d
    exp = TailExpansion(terms, k, rep.i_star, iota)
    if check_refined and positive:
        exp.checks = iota_check(model, law, C, k, iota_bar=iota)
        exp.refined_valid = all(v == "verified" for v in exp.checks.values())
    return exp


def leading_order(exp: TailExpansion):
    for t in exp.terms:
        if t.i == exp.iota_bar and t.resolved:
            return t.exponent, t.coefficient
    raise NoResolvableOrder("every coefficient is zero (or indistinguishable from zero)")


def evaluate(exp: TailExpansion, t: float):
    """(full power sum, leading term), both clamped to [0, 1]."""
    if not t > 0:
        raise ValidationError("t must be positive")
    full = math.fsum(term.coefficient * t ** (-term.exponent) for term in exp.terms)
    try:
        e, c = leading_order(exp)
        lead = c * t ** (-e)
    except NoResolvableOrder:
        lead = 0.0
    return min(1.0, max(0.0, full)), min(1.0, max(0.0, lead))


def _is_onehot(A) -> bool:
    return bool(((A > 0).sum(axis=1) == 1).all())


def _clause_rows(A, C, clause):
    if C.kind == "rect":
        G = np.stack([A[r] for r in clause.coords])
        return G, np.asarray(clause.gamma, dtype=np.float64)
    a, b = clause.arrays()
    if len(b) == 0:
        return np.zeros((0, A.shape[1])), b
    return a @ A, b


def preimage_status(A, C) -> str:
    """'empty', 'nonempty' or 'unknown' for {z >= 0 : Az in C}.

    Each clause is a system of strict inequalities G z > b; it has a
    solution iff the largest slack s with G z >= b + s, s <= 1, is positive.
    """
    A = np.asarray(A, dtype=np.float64)
    d = A.shape[1]
    unknown = False
    for clause in C.clauses:
        G, b = _clause_rows(A, C, clause)
        if len(b) == 0:
            return "nonempty"
        # variables (z, s); maximize s
        cost = np.zeros(d + 1)
        cost[-1] = -1.0
        A_ub = np.hstack([-G, np.ones((len(b), 1))])
        res = linprog(cost, A_ub=A_ub, b_ub=-b,
                      bounds=[(0, None)] * d + [(None, 1.0)], method="highs")
        if res.status != 0:
            unknown = True
            continue
        s = -res.fun
        if s > LP_NONEMPTY_TOL:
            return "nonempty"
        if s > LP_EMPTY_TOL:
            unknown = True
    return "unknown" if unknown else "empty"


def _probe(A, C, seed):
    """Sampling probe; only able to find points, never to prove emptiness."""
    rng = np.random.default_rng(seed)
    d = A.shape[1]
    Z = np.exp(rng.uniform(-np.log(PROBE_AMPLITUDE), np.log(PROBE_AMPLITUDE), (PROBE_POINTS, d)))
    Z *= rng.random((PROBE_POINTS, d)) < 0.7
    return bool(risksets.contains_many(C, Z @ A.T).any())


def iota_check(model, law, C, k: int, iota_bar: int | None = None, seed=0) -> dict:
    """For atoms with i_k(A_m) below the refined order, is A_m^{-1}(C) empty?

    Values are 'verified' (empty), 'nonempty' (hypothesis fails) or
    'inconclusive'. One-hot atoms with a rectangle set are verified
    outright: their pre-image is a union of boxes on which the lower-order
    measure vanishes.
    """
    C = at_level(C, k)
    if iota_bar is None:
        iota_bar = expansion(model, law, C, k, check_refined=False).iota_bar
    rep = partition(law, k)
    out = {}
    for m, ((A, _), ik) in enumerate(zip(enumerate_support(law), rep.per_atom)):
        if ik >= iota_bar:
            continue
        if C.kind == "rect" and _is_onehot(A):
            out[m] = "verified"
            continue
        status = preimage_status(A, C)
        if status == "empty":
            out[m] = "verified"
        elif status == "nonempty" or _probe(A, C, seed):
            out[m] = "nonempty"
        else:
            out[m] = "inconclusive"
    return out
