"""Tail events C in R_+^q that stay away from the lower-order hyperplanes.

A set is a union of clauses. Rectangle clauses are open upper orthants
``{x_j > gamma_j, j in J}``; halfspace clauses are finite intersections of
strict inequalities ``a . x > b``. Coordinates are 0-based.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import CapacityError, ValidationError

MAX_CLAUSES = 20
AUDIT_POINTS = 100_000


@dataclass(frozen=True)
class RectClause:
    coords: tuple
    gamma: tuple

    def intersect(self, other: "RectClause") -> "RectClause":
        merged = dict(zip(self.coords, self.gamma))
        for j, g in zip(other.coords, other.gamma):
            merged[j] = max(merged.get(j, g), g)
        keys = tuple(sorted(merged))
        return RectClause(keys, tuple(merged[j] for j in keys))


@dataclass(frozen=True)
class HalfspaceClause:
    a: tuple  # rows of coefficients
    b: tuple

    def arrays(self):
        q = len(self.a[0]) if self.a else 0
        return np.asarray(self.a, dtype=np.float64).reshape(len(self.b), q), np.asarray(self.b, dtype=np.float64)


@dataclass(frozen=True)
class RiskSet:
    dim: int
    k: int
    kind: str
    clauses: tuple
    declared_delta: float | None = None
    _audited: list = field(default_factory=list, compare=False, repr=False)

    def __post_init__(self):
        if not 1 <= self.k <= self.dim:
            raise ValidationError(f"cone level k={self.k} outside 1..{self.dim}")
        if not self.clauses:
            raise ValidationError("a risk set needs at least one clause")
        if self.kind == "rect":
            for c in self.clauses:
                if len(c.coords) < self.k:
                    raise ValidationError("every rectangle clause must constrain at least k coordinates")
                if any(not g > 0 for g in c.gamma):
                    raise ValidationError("rectangle thresholds must be strictly positive")
                if any(not 0 <= j < self.dim for j in c.coords):
                    raise ValidationError("rectangle coordinate out of range")
        elif self.kind == "halfspace":
            if self.declared_delta is None or not self.declared_delta > 0:
                raise ValidationError("halfspace sets need a positive declared delta")
            for c in self.clauses:
                if any(len(row) != self.dim for row in c.a) or len(c.a) != len(c.b):
                    raise ValidationError("halfspace clause shape does not match dim")
        else:
            raise ValidationError(f"unknown risk set kind {self.kind!r}")


def rect_union(dim: int, k: int, clauses: Iterable) -> RiskSet:
    """``clauses`` holds mappings coordinate -> threshold (or RectClause)."""
    out = []
    for c in clauses:
        if isinstance(c, RectClause):
            out.append(c)
            continue
        items = sorted(dict(c).items())
        out.append(RectClause(tuple(int(j) for j, _ in items), tuple(float(g) for _, g in items)))
    return RiskSet(dim, k, "rect", tuple(out))


def halfspace_union(dim: int, k: int, clauses: Iterable, delta: float) -> RiskSet:
    """``clauses`` holds (a_rows, b_values) pairs meaning a_rows @ x > b_values."""
    out = []
    for c in clauses:
        if isinstance(c, HalfspaceClause):
            out.append(c)
            continue
        a, b = c
        out.append(HalfspaceClause(tuple(tuple(float(v) for v in row) for row in a),
                                   tuple(float(v) for v in b)))
    return RiskSet(dim, k, "halfspace", tuple(out), float(delta))


def contains_many(C: RiskSet, X) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != C.dim:
        raise ValidationError(f"points must have {C.dim} coordinates")
    hit = np.zeros(X.shape[0], dtype=bool)
    for c in C.clauses:
        if C.kind == "rect":
            inside = np.all(X[:, list(c.coords)] > np.asarray(c.gamma), axis=1)
        else:
            a, b = c.arrays()
            inside = np.all(X @ a.T > b, axis=1) if len(b) else np.ones(X.shape[0], dtype=bool)
        hit |= inside
    return hit


def contains(C: RiskSet, x) -> bool:
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (C.dim,):
        raise ValidationError(f"point must have {C.dim} coordinates")
    return bool(contains_many(C, x[None, :])[0])


def _rect_delta(C: RiskSet) -> float:
    best = np.inf
    for c in C.clauses:
        padded = np.zeros(C.dim)
        padded[list(c.coords)] = c.gamma
        best = min(best, np.sort(padded)[::-1][C.k - 1])
    return float(best)


def sample_points(C: RiskSet, n: int, rng) -> np.ndarray:
    """Rejection-sample up to ``n`` points of C from a wide log-normal proposal."""
    rng = np.random.default_rng(rng)
    scale = 1.0
    if C.kind == "halfspace":
        bs = [abs(v) for c in C.clauses for v in c.b]
        scale = max(bs + [C.declared_delta or 1.0])
    else:
        scale = max(g for c in C.clauses for g in c.gamma)
    got, tries = [], 0
    while sum(len(g) for g in got) < n and tries < 50:
        X = scale * np.exp(rng.normal(0.0, 2.0, size=(4 * n, C.dim)))
        got.append(X[contains_many(C, X)])
        tries += 1
    pts = np.concatenate(got) if got else np.empty((0, C.dim))
    return pts[:n]


def delta(C: RiskSet, seed: int = 0) -> float:
    """Lower bound of x^(k) over C.

    Exact for rectangle unions. For halfspace unions the declared value is
    returned after checking it on sampled members of C.
    """
    if C.kind == "rect":
        return _rect_delta(C)
    if not C._audited:
        pts = sample_points(C, AUDIT_POINTS, seed)
        if len(pts):
            kth = -np.sort(-pts, axis=1)[:, C.k - 1]
            bad = kth < C.declared_delta
            if bad.any():
                raise ValidationError(
                    f"declared delta {C.declared_delta} exceeds x^(k)={kth[bad].min():.6g} "
                    "at a sampled point of the set")
        C._audited.append(True)
    return float(C.declared_delta)


def scale(C: RiskSet, t: float) -> RiskSet:
    if not t > 0:
        raise ValidationError("scale factor must be positive")
    if C.kind == "rect":
        return RiskSet(C.dim, C.k, "rect",
                       tuple(RectClause(c.coords, tuple(t * g for g in c.gamma)) for c in C.clauses))
    return RiskSet(C.dim, C.k, "halfspace",
                   tuple(HalfspaceClause(c.a, tuple(t * v for v in c.b)) for c in C.clauses),
                   t * C.declared_delta)


def inclusion_exclusion(items: Sequence, intersect: Callable, is_empty: Callable | None = None,
                        cap: int = MAX_CLAUSES):
    """Signed terms of the inclusion-exclusion expansion of a union.

    Returns a list of (sign, item) with identical intersections merged and
    zero-weight terms dropped. ``is_empty`` prunes intersections (and all
    their supersets) early.
    """
    items = list(dict.fromkeys(items))
    if len(items) > cap:
        raise CapacityError(f"inclusion-exclusion limited to {cap} clauses, got {len(items)}")
    weights: dict = {}
    order = []
    # depth-first over index sets, extending only with larger indices
    stack = [(i, items[i], 1) for i in range(len(items) - 1, -1, -1)]
    while stack:
        last, cur, size = stack.pop()
        if is_empty is not None and is_empty(cur):
            continue
        if cur not in weights:
            weights[cur] = 0
            order.append(cur)
        weights[cur] += 1 if size % 2 else -1
        for nxt in range(len(items) - 1, last, -1):
            stack.append((nxt, intersect(cur, items[nxt]), size + 1))
    return [(weights[c], c) for c in order if weights[c] != 0]


def disjointify(C: RiskSet):
    """Signed rectangle clauses whose weighted indicator sum equals 1_C."""
    if C.kind != "rect":
        raise ValidationError("disjointify needs a rectangle union")
    return inclusion_exclusion(C.clauses, RectClause.intersect)


def everything(dim: int, k: int = 1) -> RiskSet:
    """The whole orthant as a (degenerate) halfspace set; useful as a control."""
    return RiskSet(dim, k, "halfspace", (HalfspaceClause((), ()),), 1.0)
