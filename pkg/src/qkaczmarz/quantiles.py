"""Empirical quantiles of residual multisets, and the index subsampling
that feeds them.

The quantile convention everywhere: for a multiset of N values, the
q-quantile is the floor(q*N)-th smallest (1-indexed, duplicates counted with
multiplicity), falling back to the minimum when q*N < 1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, EmptyInput, MissingTruth, SubsampleTooLarge
from .systems import LinearSystem

WITH_REPLACEMENT = "with_replacement"
WITHOUT_REPLACEMENT = "without_replacement"
FULL_SAMPLE = "full_sample"
_MODES = (WITH_REPLACEMENT, WITHOUT_REPLACEMENT, FULL_SAMPLE)

# Products q*N that land within this relative distance of an integer are
# snapped to it before flooring.  Levels arrived at arithmetically, such as
# (q - beta) or (q - beta - eps) / (1 - beta), routinely miss their intended
# integer rank by a few ulps, and a raw floor would silently shift the rank.
_RANK_SNAP = 1e-9


@dataclass(frozen=True)
class QuantileSpec:
    """Quantile level plus how to sample the residual multiset.

    ``size`` is the subsample size D; it is ignored (and may be None) in
    full-sample mode.
    """

    q: float
    size: int | None = None
    mode: str = WITH_REPLACEMENT

    def __post_init__(self) -> None:
        if not 0.0 < self.q < 1.0:
            raise DomainError("q must lie strictly between 0 and 1")
        if self.mode not in _MODES:
            raise DomainError(f"mode must be one of {_MODES}")
        if self.mode != FULL_SAMPLE:
            if self.size is None or self.size < 1:
                raise DomainError("subsample size must be an integer >= 1")


def quantile_rank(q: float, count: int) -> int:
    """1-indexed rank floor(q*count), snapped, clamped into [1, count]."""
    if count <= 0:
        raise EmptyInput("quantile of an empty multiset")
    if not 0.0 < q < 1.0:
        raise DomainError("q must lie strictly between 0 and 1")
    t = q * count
    nearest = round(t)
    if abs(t - nearest) <= _RANK_SNAP * max(1.0, abs(nearest)):
        rank = int(nearest)
    else:
        rank = int(np.floor(t))
    return min(max(rank, 1), count)


def multiset_quantile(values, q: float) -> float:
    """The floor(q*N)-th smallest value (minimum when q*N < 1)."""
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1:
        arr = arr.ravel()
    rank = quantile_rank(q, arr.size)
    # Partial selection; full sorting would be wasted work at large N.
    return float(np.partition(arr, rank - 1)[rank - 1])


def draw_subsample(m: int, spec: QuantileSpec, rng: np.random.Generator) -> np.ndarray:
    """Indices feeding one quantile evaluation.

    Full-sample mode returns [0, m) without consuming randomness, so a
    full-sample run stays on the same update-row sequence as any subsampled
    run with the same seed.
    """
    if m < 1:
        raise DomainError("m must be >= 1")
    if spec.mode == FULL_SAMPLE:
        return np.arange(m, dtype=np.int64)
    if spec.mode == WITH_REPLACEMENT:
        return rng.integers(0, m, size=spec.size, dtype=np.int64)
    if spec.size > m:
        raise SubsampleTooLarge(f"cannot draw {spec.size} distinct indices from {m}")
    return rng.choice(m, size=spec.size, replace=False).astype(np.int64)


def subsampled_residual_quantile(
    system: LinearSystem,
    x: np.ndarray,
    spec: QuantileSpec,
    rng: np.random.Generator,
) -> float:
    """q-quantile of |<a_i, x> - b_i| over a drawn index multiset."""
    if spec.mode == FULL_SAMPLE:
        values = np.abs(system.rows @ x - system.rhs)
    else:
        idx = draw_subsample(system.m, spec, rng)
        values = np.abs(system.rows[idx] @ x - system.rhs[idx])
    return multiset_quantile(values, spec.q)


def uncorrupted_quantile(
    system: LinearSystem,
    x: np.ndarray,
    q: float,
    restrict: np.ndarray | None = None,
) -> float:
    """q-quantile of the corruption-free residuals |<a_i, x - x*>|.

    Verification-only: needs the planted solution.  ``restrict`` optionally
    limits the multiset to a subset of equations (for example the clean set).
    """
    if system.truth is None:
        raise MissingTruth("uncorrupted quantile needs the planted solution")
    e = x - system.truth
    if restrict is None:
        values = np.abs(system.rows @ e)
    else:
        idx = np.asarray(restrict, dtype=np.int64)
        if idx.size == 0:
            raise EmptyInput("restriction set is empty")
        values = np.abs(system.rows[idx] @ e)
    return multiset_quantile(values, q)
