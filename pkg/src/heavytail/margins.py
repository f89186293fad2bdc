"""Tail models for the random vector Z.

Two kinds are supported: independent Pareto margins with scales ``kappa``,
and a three-dimensional family whose copula is

    C(v) = v1 v2 v3 (1 + theta * ((1-v1)(1-v2)(1-v3))**rho)

with the same Pareto margins. Its pairwise margins are independent, but the
triple tail is lighter than under independence.

Coordinates are indexed from 0; order-statistic levels ``i`` count from 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from typing import Sequence

import numpy as np

from . import kernels
from .errors import CapacityError, UnsupportedModelError, ValidationError

ROOT_TOL = 1e-10
MAX_SUBSET_DIM = 25


@dataclass(frozen=True)
class MarginalModel:
    kind: str
    alpha: float
    kappa: tuple
    rho: float = 1.0
    theta: float = 0.0

    def __post_init__(self):
        if self.kind not in ("iid", "dependent"):
            raise ValidationError(f"unknown margin kind {self.kind!r}")
        if not self.alpha > 0:
            raise ValidationError("alpha must be positive")
        if len(self.kappa) == 0 or any(not k > 0 for k in self.kappa):
            raise ValidationError("every kappa must be positive")
        if self.kind == "dependent":
            if len(self.kappa) != 3:
                raise ValidationError("the dependent model is three-dimensional")
            if self.rho < 1:
                raise ValidationError("rho must be >= 1")
            if not 0 <= self.theta <= 1:
                raise ValidationError("theta must lie in [0, 1]")

    @property
    def d(self) -> int:
        return len(self.kappa)

    @property
    def is_product(self) -> bool:
        return self.kind == "iid" or self.theta == 0


def iid_pareto(alpha, kappa) -> MarginalModel:
    return MarginalModel("iid", alpha, tuple(kappa))


def dependent_pareto(alpha, kappa, rho=1.0, theta=1.0) -> MarginalModel:
    return MarginalModel("dependent", alpha, tuple(kappa), rho, theta)


@dataclass(frozen=True)
class OrderStatTailLaw:
    """P(Z^(i) > t) ~ constant * t**(-exponent)."""

    i: int
    exponent: float
    constant: float


def _check_coord(model, j):
    if not 0 <= j < model.d:
        raise ValidationError(f"coordinate {j} out of range for d={model.d}")


def _check_level(model, i):
    if not 1 <= i <= model.d:
        raise ValidationError(f"order index {i} out of range 1..{model.d}")


def marginal_survival(model: MarginalModel, j: int, z: float) -> float:
    """Exact P(Z_j > z); clamps to 1 below the Pareto threshold."""
    _check_coord(model, j)
    if not z > 0:
        raise ValidationError("z must be positive")
    return min(1.0, model.kappa[j] * z ** (-model.alpha))


def elementary_symmetric(values: Sequence[float], i: int) -> float:
    """Sum over i-subsets of the product of members, compensated."""
    if len(values) > MAX_SUBSET_DIM:
        raise CapacityError(f"subset sums limited to d <= {MAX_SUBSET_DIM}")
    return math.fsum(math.prod(c) for c in combinations(values, i))


def _supports_asymptotics(model):
    if model.kind == "dependent" and not (model.rho == 1 and model.theta == 1):
        raise UnsupportedModelError(
            "order-statistic constants for the dependent model need rho = theta = 1")


def order_stat_tail(model: MarginalModel, i: int) -> OrderStatTailLaw:
    _check_level(model, i)
    a = model.alpha
    if model.kind == "iid":
        return OrderStatTailLaw(i, i * a, elementary_symmetric(model.kappa, i))
    _supports_asymptotics(model)
    k = model.kappa
    if i < 3:
        return OrderStatTailLaw(i, i * a, elementary_symmetric(k, i))
    return OrderStatTailLaw(3, 4 * a, k[0] * k[1] * k[2] * math.fsum(k))


def canonical_scaling(model: MarginalModel, i: int, t: float) -> float:
    """b_i(t) with t * P(Z^(i) > b_i(t)) -> 1."""
    if not t > 0:
        raise ValidationError("t must be positive")
    law = order_stat_tail(model, i)
    return (law.constant * t) ** (1.0 / law.exponent)


def order_stat_survival(model: MarginalModel, i: int, t: float) -> float:
    """Exact P(Z^(i) > t) at finite t.

    Independent margins use the Poisson-binomial recursion. The dependent
    model needs t in the Pareto range of every margin.
    """
    _check_level(model, i)
    u = [min(1.0, k * t ** (-model.alpha)) for k in model.kappa]
    if model.is_product:
        # dist[c] = P(exactly c exceedances)
        dist = [1.0]
        for p in u:
            nxt = [0.0] * (len(dist) + 1)
            for c, mass in enumerate(dist):
                nxt[c] += mass * (1 - p)
                nxt[c + 1] += mass * p
            dist = nxt
        return math.fsum(dist[i:])
    if max(u) >= 1:
        raise ValidationError("t below the Pareto range of some margin")
    # union / pairs / triple via the copula; pairs are independent
    u1, u2, u3 = u
    triple = joint_survival(model, t, t, t)
    pairs = u1 * u2 + u1 * u3 + u2 * u3
    if i == 1:
        return u1 + u2 + u3 - pairs + triple
    if i == 2:
        return pairs - 2 * triple
    return triple


def joint_survival(model: MarginalModel, z1, z2, z3) -> float:
    """P(Z1 > z1, Z2 > z2, Z3 > z3) for the three-dimensional models."""
    if model.d != 3:
        raise ValidationError("joint_survival is defined for d = 3")
    u = [min(1.0, k * z ** (-model.alpha)) for k, z in zip(model.kappa, (z1, z2, z3))]
    base = u[0] * u[1] * u[2]
    if model.is_product:
        return base
    # inclusion-exclusion on C(v) with v = 1 - u leaves one cross term
    return base - model.theta * (base ** model.rho) * (1 - u[0]) * (1 - u[1]) * (1 - u[2])


def exact_joint_tail(model: MarginalModel, t: float) -> float:
    """Exact P(Z1 > t, Z2 > t, Z3 > t) for the dependent family."""
    if model.kind != "dependent":
        raise ValidationError("exact_joint_tail needs the dependent model")
    if t < max(k ** (1.0 / model.alpha) for k in model.kappa):
        raise ValidationError("t below the Pareto range of some margin")
    return joint_survival(model, t, t, t)


def _uniform_open(rng, shape):
    # (0, 1], so no infinite draws
    return 1.0 - rng.random(shape)


def _h(u, rho):
    # derivative factor of the copula cross term, written in survival units
    if rho == 1:
        return 2.0 * u - 1.0
    return u ** (rho - 1) * ((1 + rho) * u - rho)


def sample_survival_units(model: MarginalModel, rng: np.random.Generator, n: int) -> np.ndarray:
    """Draw U_j = P(Z_j > z) evaluated at the sample, shape (n, d)."""
    if n < 1:
        raise ValidationError("n must be >= 1")
    if model.is_product:
        return _uniform_open(rng, (n, model.d))
    u = np.empty((n, 3))
    # the first two survival units are independent uniforms
    u[:, :2] = _uniform_open(rng, (n, 2))
    w = _uniform_open(rng, n)
    b = model.theta * _h(u[:, 0], model.rho) * _h(u[:, 1], model.rho)
    u[:, 2] = kernels.cond_bisect(np.ascontiguousarray(b), w, float(model.rho), ROOT_TOL)
    if not np.all((u[:, 2] > 0) & (u[:, 2] <= 1)):
        raise RuntimeError("conditional inversion left the unit interval")
    return u


def sample(model: MarginalModel, rng, n: int) -> np.ndarray:
    """Exact draws of Z, shape (n, d). ``rng`` may be a seed or a Generator."""
    rng = np.random.default_rng(rng)
    u = sample_survival_units(model, rng, n)
    kappa = np.asarray(model.kappa, dtype=np.float64)
    return (kappa / u) ** (1.0 / model.alpha)
