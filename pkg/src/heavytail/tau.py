"""Order statistics and the matrix functionals tau^(k,i)(A).

``tau_matrix(A, k, i)`` is the supremum of (Az)^(k) over z with z^(i) = 1.
It is computed exactly: on that boundary at most i-1 coordinates exceed 1,
so the supremum is a maximum over small column subsets S. Rows touched by S
can be driven to infinity; the others are capped by their row sums.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import CapacityError, ValidationError

MAX_COLUMNS = 22


class _Infinite:
    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    def __repr__(self):
        return "INF"

    __str__ = __repr__

    def __float__(self):
        return float("inf")

    def __reduce__(self):
        return (_Infinite, ())


INF = _Infinite()


@dataclass(frozen=True)
class TauValue:
    value: float | None  # None when infinite

    @property
    def finite(self) -> bool:
        return self.value is not None

    def __float__(self):
        return float("inf") if self.value is None else float(self.value)

    def __le__(self, other: "TauValue") -> bool:
        if other.value is None:
            return True
        if self.value is None:
            return False
        return self.value <= other.value

    def __str__(self):
        return "INF" if self.value is None else repr(self.value)


@dataclass(frozen=True)
class CoverCertificate:
    columns: frozenset
    covered_rows: frozenset


def order_stat(x, k: int) -> float:
    """k-th largest coordinate of x."""
    x = np.asarray(x, dtype=np.float64)
    if not 1 <= k <= x.shape[-1]:
        raise ValidationError(f"k={k} outside 1..{x.shape[-1]}")
    return float(np.partition(x, x.shape[-1] - k)[x.shape[-1] - k])


def order_stats(X, k: int) -> np.ndarray:
    """Row-wise k-th largest value of a 2-D array."""
    X = np.asarray(X, dtype=np.float64)
    n = X.shape[1]
    return np.partition(X, n - k, axis=1)[:, n - k]


def _prepare(A):
    A = np.asarray(A, dtype=np.float64)
    if A.ndim != 2 or A.size == 0:
        raise ValidationError("A must be a non-empty 2-D matrix")
    if (A < 0).any() or not np.isfinite(A).all():
        raise ValidationError("A must have finite non-negative entries")
    if not (A > 0).any(axis=1).all():
        raise ValidationError("A has a trivial (all-zero) row")
    if A.shape[1] > MAX_COLUMNS:
        raise CapacityError(f"subset enumeration limited to d <= {MAX_COLUMNS}")
    return A


def _rowmasks(A) -> np.ndarray:
    weights = np.left_shift(np.uint64(1), np.arange(A.shape[1], dtype=np.uint64))
    return np.ascontiguousarray(((A > 0).astype(np.uint64) * weights).sum(axis=1, dtype=np.uint64))


def _mask_to_set(mask: int, n: int) -> frozenset:
    return frozenset(j for j in range(n) if mask >> j & 1)


def tau_matrix_with_witness(A, k: int, i: int):
    """Return (TauValue, column mask attaining the value or forcing divergence)."""
    A = _prepare(A)
    q, d = A.shape
    if not 1 <= k <= q:
        raise ValidationError(f"k={k} outside 1..{q}")
    if not 1 <= i <= d:
        raise ValidationError(f"i={i} outside 1..{d}")
    value, infinite, witness = kernels.tau_scan(
        _rowmasks(A), np.ascontiguousarray(A.sum(axis=1)), d, k, i - 1)
    return (TauValue(None) if infinite else TauValue(float(value))), int(witness)


def tau_matrix(A, k: int, i: int) -> TauValue:
    return tau_matrix_with_witness(A, k, i)[0]


def critical_index(A, k: int):
    """Smallest number of columns covering at least k rows, with a witness."""
    A = _prepare(A)
    q, d = A.shape
    if not 1 <= k <= q:
        raise ValidationError(f"k={k} outside 1..{q}")
    masks = _rowmasks(A)
    size, s = kernels.min_cover(masks, d, k)
    cols = _mask_to_set(int(s), d)
    rows = frozenset(r for r in range(q) if int(masks[r]) & int(s))
    return int(size), CoverCertificate(cols, rows)


def tau_oracle(A, k: int, i: int, budget: int = 1000, seed=0):
    """Randomized lower bound for tau^(k,i)(A) and a divergence flag.

    Each trial picks at most i-1 coordinates to amplify and a base point in
    (0, 1]^d with one coordinate pinned at 1 (coordinates are 1 with
    probability 1/2 otherwise). The amplified coordinates are pushed through
    a geometric ladder of levels; a ratio close to 10 between the last two
    levels means the order statistic grows linearly, i.e. divergence. The
    ladder is rescaled by the spread of the entries so that small positive
    entries are not mistaken for zeros.
    """
    if budget < 1000:
        raise ValidationError("oracle budget must be at least 1000")
    A = np.asarray(A, dtype=np.float64)
    q, d = A.shape
    rng = np.random.default_rng(seed)
    pos = A[A > 0]
    spread = d * pos.max() / pos.min()
    levels = spread * 10.0 ** np.arange(5)
    n_trials = budget // len(levels) + 1

    base = rng.uniform(0.0, 1.0, size=(n_trials, d))
    base = np.where(rng.random((n_trials, d)) < 0.5, 1.0, 1.0 - base)
    base[np.arange(n_trials), rng.integers(0, d, n_trials)] = 1.0
    amp = np.zeros((n_trials, d), dtype=bool)
    sizes = rng.integers(0, i, n_trials)  # 0..i-1
    for r in range(n_trials):
        if sizes[r]:
            amp[r, rng.choice(d, size=sizes[r], replace=False)] = True

    best = 0.0
    vals = []
    for L in levels:
        Z = np.where(amp, L, base)
        ratio = order_stats(Z @ A.T, k) / order_stats(Z, i)
        vals.append(ratio)
        best = max(best, float(ratio.max()))
    # also the unamplified base points
    ratio0 = order_stats(base @ A.T, k) / order_stats(base, i)
    best = max(best, float(ratio0.max()))
    prev, last = vals[-2], vals[-1]
    with np.errstate(divide="ignore", invalid="ignore"):
        growth = np.where(prev > 0, last / prev, 1.0)
    diverges = bool((growth >= 9.0).any())
    return best, diverges
