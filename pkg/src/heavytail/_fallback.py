"""Pure-Python/numpy versions of the compiled kernels."""

from itertools import combinations
import math

import numpy as np


def tau_scan(rowmask, rowsum, d, k, max_card):
    masks = [int(m) for m in rowmask]
    sums = [float(v) for v in rowsum]
    best, witness = -1.0, 0
    for card in range(0, min(max_card, d) + 1):
        for cols in combinations(range(d), card):
            s = 0
            for j in cols:
                s |= 1 << j
            free = [sums[r] for r, m in enumerate(masks) if not m & s]
            c = len(masks) - len(free)
            if c >= k:
                return math.inf, True, s
            free.sort(reverse=True)
            v = free[k - c - 1]
            if v > best:
                best, witness = v, s
    return best, False, witness


def min_cover(rowmask, d, k):
    masks = [int(m) for m in rowmask]
    for card in range(1, d + 1):
        for cols in combinations(range(d), card):
            s = 0
            for j in cols:
                s |= 1 << j
            if sum(1 for m in masks if m & s) >= k:
                return card, s
    return -1, 0


def cond_bisect(b, w, rho, tol):
    b = np.asarray(b, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    lo = 0.5 * w
    hi = np.minimum(np.sqrt(w), 1.0)
    for _ in range(200):
        live = hi - lo > tol * lo
        if not live.any():
            break
        mid = np.sqrt(lo * hi)
        up = mid if rho == 1.0 else mid ** rho
        below = mid - b * up * (1.0 - mid) < w
        lo = np.where(live & below, mid, lo)
        hi = np.where(live & ~below, mid, hi)
    return 0.5 * (lo + hi)
