"""Closed-form bounds and admissible-parameter bookkeeping.

Everything here is arithmetic on floats (or exact rationals for the binomial
tail bound): KL divergence between Bernoulli laws, the resulting Chernoff
bound on binomial tails, failure probabilities for subsampled quantile
estimates, subsample-size thresholds, and the contraction/attack constants
used by the convergence and failure statements.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .errors import DomainError, SideMismatch

LOWER = "lower"
UPPER = "upper"
_SIDES = (LOWER, UPPER)


def kl_bernoulli(p: float, r: float) -> float:
    """KL divergence D(Bernoulli(p) || Bernoulli(r)).

    Finite only when r is interior; p may sit on the boundary, with the
    usual 0 log 0 = 0 convention.
    """
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"p must lie in [0, 1], got {p}")
    if not 0.0 < r < 1.0:
        raise DomainError(f"r must lie in (0, 1), got {r}")
    total = 0.0
    if p > 0.0:
        total += p * math.log(p / r)
    if p < 1.0:
        total += (1.0 - p) * math.log((1.0 - p) / (1.0 - r))
    return total


def _check_side(N: int, k: int, r, side: str, exact: bool) -> None:
    if N < 1:
        raise DomainError("N must be >= 1")
    if not 0 <= k <= N:
        raise DomainError(f"k must lie in [0, {N}], got {k}")
    if side not in _SIDES:
        raise DomainError(f"side must be one of {_SIDES}")
    if exact:
        r_frac = Fraction(r)
    else:
        # Round float r to the nearest modest-denominator rational, so grid
        # values like 0.15 compare as intended at the k/N boundary.
        r_frac = Fraction(r).limit_denominator(10**12)
    if not 0 < r_frac < 1:
        raise DomainError(f"r must lie in (0, 1), got {r}")
    ratio = Fraction(k, N)
    if side == LOWER and ratio > r_frac:
        raise SideMismatch(
            f"k/N = {k}/{N} exceeds r = {r}; the lower tail needs k/N <= r"
        )
    if side == UPPER and ratio < r_frac:
        raise SideMismatch(
            f"k/N = {k}/{N} is below r = {r}; the upper tail needs k/N >= r"
        )


def chernoff_tail(N: int, k: int, r: float, side: str = LOWER) -> float:
    """exp(-N * D(k/N || r)): an upper bound on P(Bin(N, r) <= k) when
    k/N <= r (side 'lower'), and on P(Bin(N, r) >= k) when k/N >= r
    (side 'upper').

    The expression is the same on both sides; only its validity region
    differs, and calling it on the wrong side of the mean is always a bug,
    hence the side check instead of a silently false answer.
    """
    _check_side(N, k, r, side, exact=False)
    return math.exp(-N * kl_bernoulli(k / N, r))


def chernoff_tail_exact(N: int, k: int, r: Fraction, side: str = LOWER) -> Fraction:
    """The same bound as an exact rational: (Nr/k)^k ((N(1-r))/(N-k))^(N-k).

    Factors with exponent zero are dropped, which realizes the 0 log 0
    convention and keeps the corners k = 0 and k = N exact (where the bound
    coincides with the true tail).
    """
    r = Fraction(r)
    _check_side(N, k, r, side, exact=True)
    out = Fraction(1)
    if k > 0:
        out *= (N * r / k) ** k
    if k < N:
        out *= (N * (1 - r) / (N - k)) ** (N - k)
    return out


def quantile_bound_failure(params: "TheoryParams", D: int, side: str) -> float:
    """Per-step probability that a size-D subsampled q-quantile escapes its
    window on the given side.

    The subsampled quantile exceeds the population (q + eps_u)-quantile only
    if at least qD of D i.i.d. level indicators fire against the odds, and
    drops below the (q - eps_l)-quantile only in the mirrored event; each
    tail is Chernoff-bounded, giving exp(-D * KL(q || q +/- eps)).
    """
    if D < 1:
        raise DomainError("D must be >= 1")
    if side == UPPER:
        return math.exp(-D * kl_bernoulli(params.q, params.q + params.eps_u))
    if side == LOWER:
        return math.exp(-D * kl_bernoulli(params.q, params.q - params.eps_l))
    raise DomainError(f"side must be one of {_SIDES}")


def union_failure_bound(params: "TheoryParams", D: int, T: int) -> float:
    """Probability that any of T steps sees its subsampled quantile exceed
    the upper window edge, by a union bound; clipped at 1."""
    if T < 1:
        raise DomainError("T must be >= 1")
    return min(1.0, T * quantile_bound_failure(params, D, UPPER))


def min_subsample_upper(
    q: float, beta: float, T: float, C_override: float | None = None
) -> int:
    """Smallest subsample size the convergence guarantee asks for, growing
    like C log T / log(1/beta).  The default C = 24/(1-q) is the one
    constant the analysis pins down; it is conservative by orders of
    magnitude, hence the override."""
    if not T > 1:
        raise DomainError("T must exceed 1")
    if not 0.0 < beta < 1.0:
        raise DomainError("beta must lie in (0, 1)")
    if not 0.0 < q < 1.0:
        raise DomainError("q must lie in (0, 1)")
    C = 24.0 / (1.0 - q) if C_override is None else C_override
    if C <= 0.0:
        raise DomainError("C must be positive")
    return math.ceil(C * math.log(T) / math.log(1.0 / beta))


def max_subsample_lower(beta: float, T: float, c0: float = 0.5) -> int:
    """Largest subsample size at which the failure statement applies, of
    order c0 log T / log(2/beta); never below 1."""
    if T < 1:
        raise DomainError("T must be >= 1")
    if not 0.0 < beta < 1.0:
        raise DomainError("beta must lie in (0, 1)")
    if not 0.0 < c0 < 1.0:
        raise DomainError("c0 must lie in (0, 1)")
    return max(math.floor(c0 * math.log(T) / math.log(2.0 / beta)), 1)


def disaster_probability(beta: float, D: int) -> float:
    """Per-step lower bound (beta/2)^(D+1) on drawing a fully corrupted
    subsample together with a corrupted update row, at the failure
    statement's half-corrupted operating point."""
    if D < 1:
        raise DomainError("D must be >= 1")
    if not 0.0 < beta <= 1.0:
        raise DomainError("beta must lie in (0, 1]")
    return (beta / 2.0) ** (D + 1)


def fast_contraction_floor(n: int, kappa: float, C: float) -> float:
    """Per-step factor 1 - C/(kappa n) below which squared error cannot
    contract with the complementary probability; errors therefore shrink no
    faster than geometrically with this ratio."""
    if n < 1:
        raise DomainError("n must be >= 1")
    if not 0.0 < kappa < 1.0:
        raise DomainError("kappa must lie in (0, 1)")
    if C <= 0.0:
        raise DomainError("C must be positive")
    value = 1.0 - C / (kappa * n)
    if value <= 0.0:
        raise DomainError(
            f"contraction floor 1 - C/(kappa n) = {value} is not positive; "
            "the bound is vacuous at these parameters"
        )
    return value


def phi_bound(sigma_max_scaled: float, q_prime: float) -> float:
    """Upper bound sigma_max(A) sqrt(n/m) / sqrt(1 - q') on the scale of
    accepted residuals at effective quantile level q'."""
    if sigma_max_scaled < 0.0:
        raise DomainError("sigma_max_scaled must be nonnegative")
    if not 0.0 <= q_prime < 1.0:
        raise DomainError("q_prime must lie in [0, 1)")
    return sigma_max_scaled / math.sqrt(1.0 - q_prime)


@dataclass(frozen=True)
class TheoryParams:
    """An admissible parameter point for the convergence statement.

    Defaults follow the analysis' choices: eps_l = q/4, alpha = q - beta -
    eps_l, alpha' = alpha/(1 - beta), C1 = 24/(1-q).  Construction enforces
    the standing assumptions, most importantly beta < min(q - eps_l,
    1 - q - eps_u); outside that region the sandwich levels are meaningless.
    """

    q: float
    beta: float
    eps_l: float | None = None
    eps_u: float = 0.1
    alpha: float | None = None
    alpha_prime: float | None = None
    C1_upper: float | None = None
    c0_lower: float = 0.5
    kappa: float | None = None

    def __post_init__(self) -> None:
        if not 0.0 < self.q < 1.0:
            raise DomainError("q must lie in (0, 1)")
        if not 0.0 <= self.beta < 1.0:
            raise DomainError("beta must lie in [0, 1)")
        if self.eps_l is None:
            object.__setattr__(self, "eps_l", self.q / 4.0)
        if not 0.0 < self.eps_l < self.q:
            raise DomainError("need 0 < eps_l < q")
        if not 0.0 < self.eps_u < 1.0 - self.q:
            raise DomainError("need 0 < eps_u < 1 - q")
        if self.beta >= min(self.q - self.eps_l, 1.0 - self.q - self.eps_u):
            raise DomainError("beta must stay below min(q - eps_l, 1 - q - eps_u)")
        if self.alpha is None:
            object.__setattr__(self, "alpha", self.q - self.beta - self.eps_l)
        if not 0.0 < self.alpha <= 1.0:
            raise DomainError("alpha must lie in (0, 1]")
        if self.alpha_prime is None:
            object.__setattr__(
                self,
                "alpha_prime",
                (self.q - self.beta - self.eps_l) / (1.0 - self.beta),
            )
        if not 0.0 < self.alpha_prime < 1.0:
            raise DomainError("alpha_prime must lie in (0, 1)")
        if self.C1_upper is None:
            object.__setattr__(self, "C1_upper", 24.0 / (1.0 - self.q))
        if self.C1_upper <= 0.0:
            raise DomainError("C1_upper must be positive")
        if not 0.0 < self.c0_lower < 1.0:
            raise DomainError("c0_lower must lie in (0, 1)")
        if self.kappa is not None and not 0.0 < self.kappa < 1.0:
            raise DomainError("kappa must lie in (0, 1) when given")

    def subsample_window(self, T: float) -> tuple[int, int]:
        """(guarantee minimum, failure-statement maximum) subsample sizes at
        horizon T.  At practical T the window is inverted: the failure regime
        needs a markedly smaller subsample than the guarantee demands."""
        if self.beta == 0.0:
            raise DomainError("subsample thresholds need beta > 0")
        lo = min_subsample_upper(self.q, self.beta, T, self.C1_upper)
        hi = max_subsample_lower(self.beta, T, self.c0_lower)
        return lo, hi
