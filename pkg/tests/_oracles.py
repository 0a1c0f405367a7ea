"""Independent reference implementations used only by tests.

Each oracle recomputes a quantity the package also computes, but by a
different method: full sorting instead of partial selection, exact rational
tail sums instead of float exponentials, dense SVD instead of power
iteration, the textbook projection formula instead of the unit-row shortcut.
Agreement between package and oracle is then evidence, not tautology.
"""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np

# Shared boundary convention for the rank floor(q*N): products meant to be
# integers may land within a few ulps of one, so both implementations snap
# before flooring.  The convention is common; the selection method is not.
RANK_SNAP = 1e-9


def sort_quantile(values, q: float) -> float:
    """q-quantile of a multiset by full stable sort.

    Rank is floor(q*N) in 1-based indexing, clamped to [1, N]; duplicates
    count with multiplicity.
    """
    ordered = sorted(float(v) for v in values)
    N = len(ordered)
    if N == 0:
        raise ValueError("empty multiset")
    t = q * N
    nearest = round(t)
    if nearest >= 1 and abs(t - nearest) <= RANK_SNAP * max(1.0, abs(t)):
        rank = int(nearest)
    else:
        rank = math.floor(t)
    rank = min(max(rank, 1), N)
    return ordered[rank - 1]


def binom_pmf(N: int, j: int, r: Fraction) -> Fraction:
    r = Fraction(r)
    return math.comb(N, j) * r**j * (1 - r) ** (N - j)


def binom_cdf(N: int, k: int, r: Fraction) -> Fraction:
    """P(Bin(N, r) <= k), exact."""
    return sum(binom_pmf(N, j, r) for j in range(0, k + 1))


def binom_sf(N: int, k: int, r: Fraction) -> Fraction:
    """P(Bin(N, r) >= k), exact."""
    return sum(binom_pmf(N, j, r) for j in range(k, N + 1))


def svd_singular_values(rows: np.ndarray) -> np.ndarray:
    return np.linalg.svd(np.asarray(rows, dtype=np.float64), compute_uv=False)


def project_step(row: np.ndarray, b: float, x: np.ndarray) -> np.ndarray:
    """Orthogonal projection of x onto the hyperplane <row, y> = b, by the
    general (not unit-row) formula."""
    row = np.asarray(row, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    return x + (b - row @ x) / (row @ row) * row
