"""Plain Monte Carlo for P(AZ in tC).

Draws are split into fixed-size chunks; chunk c uses the generator seeded
by SeedSequence(seed, spawn_key=(c,)). Only integer hit counts leave a
chunk, so results are bit-identical for a given (seed, chunk_size)
regardless of the thread count or scheduling.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import margins, risksets
from .errors import ValidationError
from .matrixlaw import (MatrixLaw, atom_count, enumerate_support, explicit, partition,
                        sample_atom_indices, sample_matrices)
from .measure import at_level
from ._seeds import seed_sequence

CHUNK = 1 << 20
MIN_SAMPLES = 10_000


def default_threads() -> int:
    try:
        return max(1, int(os.environ.get("HEAVYTAIL_THREADS", "1")))
    except ValueError:
        return 1


@dataclass(frozen=True)
class McEstimate:
    p_hat: float
    n: int
    stderr: float
    ci95: tuple
    seed: object
    hits: int = 0


def mc_estimate(hits: int, n: int, seed) -> McEstimate:
    p = hits / n
    se = math.sqrt(p * (1 - p) / n)
    if p * n < 50:
        z = 1.96
        den = 1 + z * z / n
        mid = (p + z * z / (2 * n)) / den
        half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / den
        ci = (max(0.0, mid - half), min(1.0, mid + half))
    else:
        ci = (p - 1.96 * se, p + 1.96 * se)
    return McEstimate(p, n, se, ci, seed, hits)


def _chunk_rng(seed, c):
    return np.random.default_rng(seed_sequence(seed, c))


def _use_atoms(law: MatrixLaw) -> bool:
    return law.kind == "explicit" or (law.kind == "onehot" and atom_count(law) <= 4096)


def _exposures(model, law, rng, m, mats):
    Z = margins.sample(model, rng, m)
    if mats is not None:
        if len(mats) == 1:
            return Z @ mats[0].T
        idx = sample_atom_indices(law, rng, m)
        X = np.empty((m, law.q))
        for a in np.unique(idx):
            sel = idx == a
            X[sel] = Z[sel] @ mats[a].T
        return X
    A = sample_matrices(law, rng, m)
    return np.einsum("nqd,nd->nq", A, Z)


def count_hits(model, law, sets, n: int, seed, chunk_size: int = CHUNK, threads: int | None = None):
    """Hit counts for each (already scaled) set, all from the same draws."""
    if n < 1:
        raise ValidationError("n must be positive")
    for C in sets:
        if C.dim != law.q:
            raise ValidationError("set dimension does not match the law")
    if law.d != model.d:
        raise ValidationError("law columns do not match the margins")
    mats = None
    if _use_atoms(law):
        mats = np.stack([A for A, _ in enumerate_support(law)])
    n_chunks = -(-n // chunk_size)

    def run(c):
        m = min(chunk_size, n - c * chunk_size)
        X = _exposures(model, law, _chunk_rng(seed, c), m, mats)
        return [int(risksets.contains_many(C, X).sum()) for C in sets]

    threads = threads or default_threads()
    if threads == 1 or n_chunks == 1:
        parts = [run(c) for c in range(n_chunks)]
    else:
        with ThreadPoolExecutor(threads) as pool:
            parts = list(pool.map(run, range(n_chunks)))
    return [sum(p[j] for p in parts) for j in range(len(sets))]


def empirical_tail(model, law, C, t: float, n: int, seed, chunk_size: int = CHUNK,
                   threads: int | None = None) -> McEstimate:
    if n < MIN_SAMPLES:
        raise ValidationError(f"n must be at least {MIN_SAMPLES}")
    hits = count_hits(model, law, [risksets.scale(C, t)], n, seed, chunk_size, threads)[0]
    return mc_estimate(hits, n, seed)


def empirical_tails(model, law, named_sets: dict, t: float, n: int, seed, **kw) -> dict:
    """Several sets evaluated on one stream of draws."""
    names = list(named_sets)
    hits = count_hits(model, law, [risksets.scale(named_sets[k], t) for k in names], n, seed, **kw)
    return {k: mc_estimate(h, n, seed) for k, h in zip(names, hits)}


@dataclass(frozen=True)
class StratumEstimate:
    i: int
    mass: object
    conditional: McEstimate | None
    estimate: float
    stderr: float


def stratified_tail(model, law, C, t: float, n: int, seed, k: int | None = None, **kw):
    """Per-i estimates of P(AZ in tC, i_k(A) = i).

    Atoms are drawn from the law conditioned on the stratum; the hit rate
    is weighted by the stratum mass.
    """
    k = C.k if k is None else k
    C = at_level(C, k)
    rep = partition(law, k)
    support = enumerate_support(law)
    out = []
    for i in range(1, law.d + 1):
        mass = rep.masses[i]
        if mass == 0:
            out.append(StratumEstimate(i, mass, None, 0.0, 0.0))
            continue
        atoms = [(A, p / mass) for (A, p), ik in zip(support, rep.per_atom) if ik == i]
        sub = explicit(atoms)
        est = empirical_tail(model, sub, C, t, n, (seed, i), **kw)
        w = float(mass)
        out.append(StratumEstimate(i, mass, est, w * est.p_hat, w * est.stderr))
    return out


@dataclass(frozen=True)
class RatioRow:
    t: float
    p_hat: float
    stderr: float
    full_eval: float
    leading_eval: float
    ratio_full: float
    ratio_leading: float


def ratio_table(model, law, C, t_grid, n: int, seed, expansion=None, **kw):
    """Empirical probabilities against the expansion on a grid of t.

    All t share one stream of draws, so p_hat is exactly nonincreasing in t
    for sets that shrink under scaling.
    """
    from .asymptotics import evaluate, expansion as build

    t_grid = list(t_grid)
    if not t_grid:
        raise ValidationError("t grid must be non-empty")
    if n < MIN_SAMPLES:
        raise ValidationError(f"n must be at least {MIN_SAMPLES}")
    exp = expansion if expansion is not None else build(model, law, C, C.k)
    hits = count_hits(model, law, [risksets.scale(C, t) for t in t_grid], n, seed, **kw)
    rows = []
    for t, h in zip(t_grid, hits):
        est = mc_estimate(h, n, seed)
        full, lead = evaluate(exp, t)
        rows.append(RatioRow(float(t), est.p_hat, est.stderr, full, lead,
                             est.p_hat / full if full > 0 else math.inf,
                             est.p_hat / lead if lead > 0 else math.inf))
    return rows
