"""Limit measures mu_i and the masses of pre-images A^{-1}(C).

For independent margins mu_i lives on the i-dimensional coordinate
hyperplanes H_J and is a product Pareto measure there with total
survival weight prod(kappa_J) / K_i. For the dependent three-dimensional
model mu_3 lives on the open orthant with survival

    S(z) = (sum_j kappa_j z_j^-alpha) * prod_j z_j^-alpha / sum(kappa).

Pre-image masses are computed exactly when each clause of C pulls back to a
box on H_J, by one-dimensional quadrature on planes (i = 2, product law),
and by Monte Carlo with exact sampling above the bound z_j > delta(C)/tau
otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations, product

import numpy as np
from scipy import integrate

from . import risksets
from .errors import InfiniteTauError, UnsupportedModelError, ValidationError
from .margins import MarginalModel, elementary_symmetric, order_stat_tail
from .matrixlaw import enumerate_support, partition
from .tau import tau_matrix
from ._seeds import seed_sequence

ANALYTIC = "analytic"
QUADRATURE = "quadrature"
MONTECARLO = "montecarlo"
MIN_PER_PLANE = 10_000
DEFAULT_MC = 400_000


@dataclass(frozen=True)
class MeasureEstimate:
    mass: float
    stderr: float
    method: str
    n: int | None = None
    seed: int | None = None


class LimitMeasure:
    def __init__(self, model: MarginalModel, i: int):
        law = order_stat_tail(model, i)  # validates i and the model
        if model.kind == "dependent" and model.d != 3:
            raise UnsupportedModelError("dependent measures need d = 3")
        self.model = model
        self.i = i
        self.alpha = model.alpha
        self.exponent = law.exponent
        self.constant = law.constant
        self.product = not (model.kind == "dependent" and i == 3)
        self._K = elementary_symmetric(model.kappa, i)

    def hyperplanes(self):
        return list(combinations(range(self.model.d), self.i))

    def weight(self, J) -> float:
        if not self.product:
            return 1.0
        return math.prod(self.model.kappa[j] for j in J) / self._K

    def survival(self, J, u) -> float:
        """mu_i{z : z_j > u_j for j in J}."""
        a = self.alpha
        u = [float(v) for v in u]
        if any(math.isinf(v) for v in u):
            return 0.0
        if self.product:
            return self.weight(J) * math.prod(v ** (-a) for v in u)
        kap = self.model.kappa
        return (math.fsum(kap[j] * v ** (-a) for j, v in zip(J, u))
                * math.prod(v ** (-a) for v in u) / math.fsum(kap))

    def box_mass(self, J, lo, hi) -> float:
        a = self.alpha
        if any(l >= h for l, h in zip(lo, hi)):
            return 0.0
        if self.product:
            return self.weight(J) * math.prod(
                l ** (-a) - (0.0 if math.isinf(h) else h ** (-a)) for l, h in zip(lo, hi))
        terms = []
        for pick in product((0, 1), repeat=len(J)):
            corner = [hi[j] if p else lo[j] for j, p in enumerate(pick)]
            terms.append((-1) ** sum(pick) * self.survival(J, corner))
        return max(0.0, math.fsum(terms))

    def sample_above(self, J, floor: float, n: int, rng) -> np.ndarray:
        """Draws from mu_i restricted to {z_J > floor}, normalized; shape (n, i)."""
        a = self.alpha
        u = 1.0 - rng.random((n, len(J)))
        if self.product:
            return floor * u ** (-1.0 / a)
        kap = np.asarray([self.model.kappa[j] for j in J], dtype=np.float64)
        heavy = rng.choice(len(J), size=n, p=kap / kap.sum())
        expo = np.full((n, len(J)), 1.0 / a)
        expo[np.arange(n), heavy] = 1.0 / (2 * a)
        return floor * u ** (-expo)


def mu_rect(measure: LimitMeasure, J, u) -> MeasureEstimate:
    J = tuple(J)
    if len(J) != measure.i:
        raise ValidationError(f"|J|={len(J)} but the measure has order {measure.i}")
    if len(u) != len(J) or any(not v > 0 for v in u):
        raise ValidationError("thresholds must be positive, one per coordinate")
    return MeasureEstimate(measure.survival(J, u), 0.0, ANALYTIC)


def at_level(C: risksets.RiskSet, k: int) -> risksets.RiskSet:
    """View C at a lower cone level (valid since E^(C.k) is inside E^(k))."""
    if k == C.k:
        return C
    if k > C.k:
        raise ValidationError(f"set lives at level {C.k}; cannot use it at level {k}")
    return risksets.RiskSet(C.dim, k, C.kind, C.clauses, C.declared_delta)


def _floor(measure, A, C):
    t = tau_matrix(A, C.k, measure.i)
    if not t.finite:
        raise InfiniteTauError(
            f"tau^({C.k},{measure.i}) is infinite; the pre-image belongs to a higher order")
    floor = risksets.delta(C) / t.value
    if not floor > 0:
        raise ValidationError("zero lower bound for the pre-image")
    return floor


# -- clause pull-back -------------------------------------------------------

def _pullback(A_J, C):
    """Per clause: list of (c, b) meaning c . z_J > b."""
    out = []
    for cl in C.clauses:
        if C.kind == "rect":
            out.append([(A_J[r], g) for r, g in zip(cl.coords, cl.gamma)])
        else:
            a, b = cl.arrays()
            out.append([(row @ A_J, bv) for row, bv in zip(a, b)])
    return out


def _reduce(constraints, dim, floor):
    """Turn constraints into box bounds where possible.

    Returns None when the clause is empty on the plane, else
    (lo, hi, remaining) with ``remaining`` the constraints that are
    neither implied by nor contradicting the box.
    """
    lo = [floor] * dim
    hi = [math.inf] * dim
    general = []
    for c, b in constraints:
        nz = np.flatnonzero(c)
        if len(nz) == 0:
            if not 0 > b:
                return None
        elif len(nz) == 1:
            j = nz[0]
            if c[j] > 0:
                lo[j] = max(lo[j], b / c[j])
            else:
                hi[j] = min(hi[j], b / c[j])
        else:
            general.append((np.asarray(c, dtype=np.float64), float(b)))
    if any(l >= h for l, h in zip(lo, hi)):
        return None
    kept = []
    for c, b in general:
        low = math.fsum(cj * (lo[j] if cj > 0 else hi[j]) for j, cj in enumerate(c) if cj != 0)
        high = math.fsum(cj * (hi[j] if cj > 0 else lo[j]) for j, cj in enumerate(c) if cj != 0)
        if low >= b:
            continue
        if high <= b:
            return None
        kept.append((c, b))
    return tuple(lo), tuple(hi), kept


def _box_union_mass(measure, J, boxes):
    boxes = list(dict.fromkeys(boxes))
    # drop boxes inside another box
    keep = []
    for n, (lo, hi) in enumerate(boxes):
        inside = any(
            m != n and all(l2 <= l for l, l2 in zip(lo, lo2)) and all(h2 >= h for h, h2 in zip(hi, hi2))
            and (lo2, hi2) != (lo, hi)
            for m, (lo2, hi2) in enumerate(boxes))
        if not inside:
            keep.append((lo, hi))

    def meet(x, y):
        return (tuple(max(a, b) for a, b in zip(x[0], y[0])),
                tuple(min(a, b) for a, b in zip(x[1], y[1])))

    def empty(x):
        return any(l >= h for l, h in zip(*x))

    terms = risksets.inclusion_exclusion(keep, meet, empty)
    return max(0.0, math.fsum(s * measure.box_mass(J, lo, hi) for s, (lo, hi) in terms))


def _plane_quadrature(measure, J, reduced):
    """Mass of a union of clauses on a 2-D plane under a product measure.

    In u_j = z_j^-alpha the density is uniform, so the inner integral over
    z_1 is a sum of interval lengths in u_1 and the outer integral is a 1-D
    quadrature split at every point where two interval endpoints cross.
    """
    a = measure.alpha
    w = measure.weight(J)

    def bounds(entry):
        lo, hi, gen = entry
        lines = [(lo[0], 0.0), (hi[0], 0.0)]
        for c, b in gen:
            if c[0] != 0:
                lines.append((b / c[0], -c[1] / c[0]))
        return lines

    def length(z2):
        spans = []
        for lo, hi, gen in reduced:
            if not lo[1] < z2 < hi[1]:
                continue
            L, H, ok = lo[0], hi[0], True
            for c, b in gen:
                rhs = b - c[1] * z2
                if c[0] > 0:
                    L = max(L, rhs / c[0])
                elif c[0] < 0:
                    H = min(H, rhs / c[0])
                elif not rhs < 0:
                    ok = False
                    break
            if ok and L < H:
                spans.append((L, H))
        spans.sort()
        total, cur = 0.0, None
        for L, H in spans:
            if cur is None or L > cur[1]:
                if cur is not None:
                    total += cur[0] ** (-a) - (0.0 if math.isinf(cur[1]) else cur[1] ** (-a))
                cur = [L, H]
            else:
                cur[1] = max(cur[1], H)
        if cur is not None:
            total += cur[0] ** (-a) - (0.0 if math.isinf(cur[1]) else cur[1] ** (-a))
        return total

    z_min = min(e[0][1] for e in reduced)
    cuts = {z_min}
    for lo, hi, gen in reduced:
        cuts.update(v for v in (lo[1], hi[1]) if math.isfinite(v))
        for c, b in gen:
            if c[0] == 0 and c[1] != 0:
                cuts.add(b / c[1])
    lines = [ln for e in reduced for ln in bounds(e) if math.isfinite(ln[0])]
    for (a1, s1), (a2, s2) in combinations(lines, 2):
        if s1 != s2:
            cuts.add((a2 - a1) / (s1 - s2))
    u_cuts = sorted({z ** (-a) for z in cuts if math.isfinite(z) and z >= z_min})
    u_cuts = [0.0] + [u for u in u_cuts if u > 0]
    total = 0.0
    for u0, u1 in zip(u_cuts, u_cuts[1:]):
        val, _ = integrate.quad(lambda u: length(u ** (-1.0 / a)) if u > 0 else 0.0,
                                u0, u1, epsabs=1e-15, epsrel=1e-13, limit=400)
        total += val
    return w * total


def _plane_mc(measure, J, A_J, C, floor, n, rng):
    Z = measure.sample_above(J, floor, n, rng)
    p = float(risksets.contains_many(C, Z @ A_J.T).mean())
    top = measure.survival(J, [floor] * len(J))
    return top * p, top * math.sqrt(p * (1 - p) / n)


def mu_set_mc(measure: LimitMeasure, A, C, n: int = DEFAULT_MC, seed=0) -> MeasureEstimate:
    """Monte Carlo estimate of mu_i(A^{-1}(C)) over every hyperplane."""
    if n < MIN_PER_PLANE:
        raise ValidationError(f"n must be at least {MIN_PER_PLANE}")
    A = np.asarray(A, dtype=np.float64)
    floor = _floor(measure, A, C)
    planes = measure.hyperplanes()
    per = max(MIN_PER_PLANE, n // len(planes))
    ss = seed_sequence(seed)
    masses, vars_ = [], []
    for child, J in zip(ss.spawn(len(planes)), planes):
        m, s = _plane_mc(measure, J, A[:, list(J)], C, floor, per, np.random.default_rng(child))
        masses.append(m)
        vars_.append(s * s)
    return MeasureEstimate(math.fsum(masses), math.sqrt(math.fsum(vars_)), MONTECARLO,
                           per * len(planes), seed)


def mu_preimage(measure: LimitMeasure, A, C, n: int = DEFAULT_MC, seed=0) -> MeasureEstimate:
    """mu_i(A^{-1}(C)), exact where the geometry allows it."""
    A = np.asarray(A, dtype=np.float64)
    if C.dim != A.shape[0]:
        raise ValidationError("set dimension does not match the number of matrix rows")
    floor = _floor(measure, A, C)
    planes = measure.hyperplanes()
    ss = seed_sequence(seed)
    children = ss.spawn(len(planes))
    per = max(MIN_PER_PLANE, n // len(planes))
    masses, vars_ = [], []
    methods = set()
    for child, J in zip(children, planes):
        A_J = A[:, list(J)]
        reduced = [r for r in (_reduce(cons, len(J), floor) for cons in _pullback(A_J, C))
                   if r is not None]
        if not reduced:
            methods.add(ANALYTIC)
            continue
        if all(not gen for _, _, gen in reduced):
            masses.append(_box_union_mass(measure, J, [(lo, hi) for lo, hi, _ in reduced]))
            methods.add(ANALYTIC)
        elif measure.product and len(J) == 2:
            masses.append(_plane_quadrature(measure, J, reduced))
            methods.add(QUADRATURE)
        else:
            m, s = _plane_mc(measure, J, A_J, C, floor, per, np.random.default_rng(child))
            masses.append(m)
            vars_.append(s * s)
            methods.add(MONTECARLO)
    if MONTECARLO in methods:
        method = MONTECARLO
    elif QUADRATURE in methods:
        method = QUADRATURE
    else:
        method = ANALYTIC
    stderr = math.sqrt(math.fsum(vars_)) if vars_ else 0.0
    return MeasureEstimate(math.fsum(masses), stderr, method,
                           per * len(vars_) if vars_ else None,
                           seed if vars_ else None)


def expected_preimage_measure(model, law, C, k: int, i: int, n: int = DEFAULT_MC,
                              seed=0) -> MeasureEstimate:
    """Sum over atoms with i_k(A_m) = i of q_m * mu_i(A_m^{-1}(C))."""
    C = at_level(C, k)
    rep = partition(law, k)
    support = enumerate_support(law)
    measure = LimitMeasure(model, i)
    cache: dict = {}
    total, var = [], []
    methods = set()
    for m, ((A, prob), ik) in enumerate(zip(support, rep.per_atom)):
        if ik != i:
            continue
        key = A.tobytes()
        if key not in cache:
            cache[key] = mu_preimage(measure, A, C, n=n, seed=(seed, m))
        est = cache[key]
        methods.add(est.method)
        total.append(float(prob) * est.mass)
        var.append((float(prob) * est.stderr) ** 2)
    if MONTECARLO in methods:
        method = MONTECARLO
    elif QUADRATURE in methods:
        method = QUADRATURE
    else:
        method = ANALYTIC
    return MeasureEstimate(math.fsum(total), math.sqrt(math.fsum(var)), method)
