"""Finitely supported laws over non-negative q x d matrices.

Probabilities stay as ``Fraction`` whenever the inputs are rational, so
partition masses can be compared with closed forms exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from numbers import Rational
from typing import Sequence

import numpy as np

from .errors import CapacityError, ValidationError
from .tau import critical_index

MAX_ATOMS = 1_000_000
MAX_BERNOULLI_CELLS = 20
SAMPLED_PARTITION_DRAWS = 100_000


def as_number(v):
    """Fractions for rational input (including "p/q" strings), floats otherwise."""
    if isinstance(v, str):
        return Fraction(v)
    if isinstance(v, bool):
        raise ValidationError("booleans are not probabilities")
    if isinstance(v, Rational):
        return Fraction(v)
    return float(v)


@dataclass(frozen=True)
class MatrixLaw:
    """One of three kinds.

    ``explicit``: ``atoms`` is a tuple of (matrix, probability).
    ``onehot``: rows independent; row r picks one allowed column uniformly
    and places ``weights[r][c]`` there (1 by default).
    ``bernoulli``: entry (r, c) is present with probability ``p[r][c]``,
    carrying weight ``weights[r][c]``, conditioned on no trivial row.
    """

    kind: str
    q: int
    d: int
    atoms: tuple = ()
    allowed: tuple = ()
    weights: tuple | None = None
    p: tuple | None = None
    _cache: dict = field(default_factory=dict, compare=False, repr=False, hash=False)


def explicit(atoms: Sequence) -> MatrixLaw:
    if not atoms:
        raise ValidationError("an explicit law needs at least one atom")
    mats = []
    for A, prob in atoms:
        A = np.asarray(A, dtype=np.float64)
        if A.ndim != 2:
            raise ValidationError("atoms must be 2-D matrices")
        mats.append((A, as_number(prob)))
    shape = mats[0][0].shape
    if any(A.shape != shape for A, _ in mats):
        raise ValidationError("all atoms must share one shape")
    return MatrixLaw("explicit", shape[0], shape[1], atoms=tuple(mats))


def point_mass(A) -> MatrixLaw:
    return explicit([(A, 1)])


def onehot(q: int, d: int, allowed: Sequence[Sequence[int]] | None = None,
           weights=None) -> MatrixLaw:
    if allowed is None:
        allowed = [range(d)] * q
    allowed = tuple(tuple(sorted(set(int(c) for c in row))) for row in allowed)
    if len(allowed) != q:
        raise ValidationError("need one allowed-column list per row")
    for row in allowed:
        if not row:
            raise ValidationError("a row with no allowed column is trivial")
        if any(not 0 <= c < d for c in row):
            raise ValidationError("allowed column out of range")
    if weights is not None:
        weights = tuple(tuple(float(w) for w in row) for row in weights)
    return MatrixLaw("onehot", q, d, allowed=allowed, weights=weights)


def bernoulli(p, weights=None) -> MatrixLaw:
    p = tuple(tuple(as_number(v) for v in row) for row in p)
    q, d = len(p), len(p[0])
    if weights is not None:
        weights = tuple(tuple(float(w) for w in row) for row in weights)
    return MatrixLaw("bernoulli", q, d, p=p, weights=weights)


def _weight_matrix(law):
    if law.weights is None:
        return np.ones((law.q, law.d))
    return np.asarray(law.weights, dtype=np.float64)


def atom_count(law: MatrixLaw) -> int:
    if law.kind == "explicit":
        return len(law.atoms)
    if law.kind == "onehot":
        return math.prod(len(r) for r in law.allowed)
    return 2 ** (law.q * law.d)


def _no_trivial_row_probability(law):
    total = 1
    for row in law.p:
        none = 1
        for v in row:
            none *= 1 - v
        total *= 1 - none
    return total


def enumerate_support(law: MatrixLaw):
    """Exact list of (matrix, probability)."""
    if "support" in law._cache:
        return law._cache["support"]
    if law.kind == "explicit":
        out = list(law.atoms)
    elif law.kind == "onehot":
        if atom_count(law) > MAX_ATOMS:
            raise CapacityError(f"{atom_count(law)} atoms exceed the cap {MAX_ATOMS}; use sampling")
        W = _weight_matrix(law)
        prob = Fraction(1, atom_count(law))
        out = []
        for cols in product(*law.allowed):
            A = np.zeros((law.q, law.d))
            A[np.arange(law.q), cols] = W[np.arange(law.q), cols]
            out.append((A, prob))
    else:
        if law.q * law.d > MAX_BERNOULLI_CELLS:
            raise CapacityError(f"q*d={law.q * law.d} exceeds {MAX_BERNOULLI_CELLS}; use sampling")
        W = _weight_matrix(law)
        norm = _no_trivial_row_probability(law)
        if norm == 0:
            raise ValidationError("every draw has a trivial row")
        flat = [v for row in law.p for v in row]
        out = []
        for bits in product((0, 1), repeat=len(flat)):
            S = np.asarray(bits, dtype=bool).reshape(law.q, law.d)
            if not S.any(axis=1).all():
                continue
            pr = 1
            for b, v in zip(bits, flat):
                pr *= v if b else 1 - v
            if pr == 0:
                continue
            out.append((np.where(S, W, 0.0), pr / norm))
    law._cache["support"] = out
    return out


@dataclass
class PartitionReport:
    k: int
    masses: dict  # i -> probability (exact when possible)
    i_star: int
    per_atom: list  # i_k for each support atom, in support order
    stderr: dict | None = None  # only for the sampled fallback
    intervals: dict | None = None


def _wilson(hits, n, z=1.96):
    p = hits / n
    den = 1 + z * z / n
    mid = (p + z * z / (2 * n)) / den
    half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / den
    return max(0.0, mid - half), min(1.0, mid + half)


def partition(law: MatrixLaw, k: int, seed=0) -> PartitionReport:
    key = ("partition", k)
    if key in law._cache:
        return law._cache[key]
    if not 1 <= k <= law.q:
        raise ValidationError(f"k={k} outside 1..{law.q}")
    try:
        support = enumerate_support(law)
    except CapacityError:
        return _sampled_partition(law, k, seed)
    masses = {i: 0 for i in range(1, law.d + 1)}
    per_atom = []
    seen: dict = {}
    for A, prob in support:
        sig = A.tobytes()
        if sig not in seen:
            seen[sig] = critical_index(A, k)[0]
        ik = seen[sig]
        per_atom.append(ik)
        masses[ik] += prob
    i_star = min(i for i, m in masses.items() if m > 0)
    rep = PartitionReport(k, masses, i_star, per_atom)
    law._cache[key] = rep
    return rep


def _sampled_partition(law, k, seed):
    rng = np.random.default_rng(seed)
    n = SAMPLED_PARTITION_DRAWS
    counts = {i: 0 for i in range(1, law.d + 1)}
    for A in sample_matrices(law, rng, n):
        counts[critical_index(A, k)[0]] += 1
    masses = {i: c / n for i, c in counts.items()}
    stderr = {i: math.sqrt(m * (1 - m) / n) for i, m in masses.items()}
    intervals = {i: _wilson(c, n) for i, c in counts.items()}
    i_star = min(i for i, m in masses.items() if m > 0)
    return PartitionReport(k, masses, i_star, [], stderr, intervals)


def sample_matrices(law: MatrixLaw, rng, n: int) -> np.ndarray:
    """n independent draws, shape (n, q, d)."""
    rng = np.random.default_rng(rng)
    if law.kind == "explicit" or (law.kind != "bernoulli" and atom_count(law) <= 4096):
        support = enumerate_support(law)
        mats = np.stack([A for A, _ in support])
        idx = sample_atom_indices(law, rng, n)
        return mats[idx]
    W = _weight_matrix(law)
    out = np.zeros((n, law.q, law.d))
    if law.kind == "onehot":
        for r, cols in enumerate(law.allowed):
            pick = np.asarray(cols)[rng.integers(0, len(cols), n)]
            out[np.arange(n), r, pick] = W[r, pick]
        return out
    P = np.asarray(law.p, dtype=np.float64)
    if not (P > 0).any(axis=1).all():
        raise ValidationError("a row with all-zero connection probabilities is always trivial")
    todo = np.arange(n)
    while len(todo):
        S = rng.random((len(todo), law.q, law.d)) < P
        ok = S.any(axis=2).all(axis=1)
        out[todo[ok]] = np.where(S[ok], W, 0.0)
        todo = todo[~ok]
    return out


def sample_atom_indices(law: MatrixLaw, rng, n: int) -> np.ndarray:
    support = enumerate_support(law)
    probs = np.array([float(p) for _, p in support])
    probs = probs / probs.sum()
    if len(probs) == 1:
        return np.zeros(n, dtype=np.int64)
    return rng.choice(len(probs), size=n, p=probs)


def sample_matrix(law: MatrixLaw, rng) -> np.ndarray:
    return sample_matrices(law, rng, 1)[0]


@dataclass
class ValidationReport:
    ok: bool
    failures: list
    moment_condition: str
    conditioning_probability: object = None


def validate(law: MatrixLaw) -> ValidationReport:
    failures = []
    cond = None
    if law.weights is not None and any(not w > 0 for row in law.weights for w in row):
        failures.append("weights: every weight must be positive")
    if law.weights is not None and (len(law.weights) != law.q or any(len(r) != law.d for r in law.weights)):
        failures.append("weights: shape does not match the law")
    if law.kind == "explicit":
        total = sum(p for _, p in law.atoms)
        if any(p < 0 for _, p in law.atoms):
            failures.append("probabilities: negative atom probability")
        if abs(float(total) - 1.0) > 1e-12:
            failures.append(f"probabilities: atoms sum to {float(total)!r}, not 1")
        for m, (A, _) in enumerate(law.atoms):
            if (A < 0).any():
                failures.append(f"atom {m}: negative entries")
            if not (A > 0).any(axis=1).all():
                failures.append(f"atom {m}: trivial row")
    elif law.kind == "bernoulli":
        for r, row in enumerate(law.p):
            if any(not 0 <= v <= 1 for v in row):
                failures.append(f"p row {r}: probabilities outside [0, 1]")
            if all(v == 0 for v in row):
                failures.append(f"p row {r}: all-zero connection probabilities give a trivial row")
        if not failures:
            cond = _no_trivial_row_probability(law)
    return ValidationReport(not failures, failures, "finite (finite support)", cond)


def require_valid(law: MatrixLaw):
    rep = validate(law)
    if not rep.ok:
        raise ValidationError("; ".join(rep.failures))
    return law
