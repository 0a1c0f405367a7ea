"""Monte-Carlo and spectral checks of the probabilistic machinery.

Three families of checks, each producing a small report object:

* subsampled-quantile sandwich: at a fixed iterate, the subsample quantile of
  observed residuals stays between a restricted clean-residual quantile below
  and an inflated clean-residual quantile above, with per-draw failure
  probability bounded by the matching Chernoff expression;
* Chernoff dominance: the closed-form tail bound really dominates the exact
  binomial tail on an exhaustive small grid, in exact rational arithmetic;
* spectral scale: power-iteration estimate of the largest singular value and
  a sampled upper estimate of the subset-minimum singular value, both in the
  sqrt(n/m) normalization the convergence constants are stated in.

Monte-Carlo reports pass when the empirical violation rate is at most the
theoretical bound plus three binomial standard errors; the bounds are
one-sided, so a correct implementation essentially never trips this.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

from .errors import ConvergenceFailure, DomainError, MissingTruth
from .quantiles import (
    FULL_SAMPLE,
    WITH_REPLACEMENT,
    QuantileSpec,
    quantile_rank,
    subsampled_residual_quantile,
    uncorrupted_quantile,
)
from .rng import RngHandle, as_handle
from .systems import LinearSystem
from .theory import (
    LOWER,
    UPPER,
    TheoryParams,
    chernoff_tail,
    chernoff_tail_exact,
    quantile_bound_failure,
)

POWER_TOL = 1e-10
POWER_MAX_ITER = 10_000


@dataclass(frozen=True)
class MonteCarloReport:
    """Outcome of one randomized check against a closed-form bound."""

    check_name: str
    instance_params: str
    trials: int
    violations: int
    empirical_rate: float
    theoretical_bound: float
    mc_stderr: float
    passed: bool

    def __post_init__(self) -> None:
        if not 0 <= self.violations <= self.trials:
            raise DomainError("violations must lie in [0, trials]")


def make_report(
    check_name: str,
    instance_params: str,
    trials: int,
    violations: int,
    bound: float,
) -> MonteCarloReport:
    rate = violations / trials
    stderr = math.sqrt(rate * (1.0 - rate) / trials)
    return MonteCarloReport(
        check_name=check_name,
        instance_params=instance_params,
        trials=trials,
        violations=violations,
        empirical_rate=rate,
        theoretical_bound=bound,
        mc_stderr=stderr,
        passed=rate <= bound + 3.0 * stderr,
    )


def _sandwich_setup(sys: LinearSystem, x: np.ndarray, params: TheoryParams):
    if sys.truth is None:
        raise MissingTruth("sandwich checks need a planted solution")
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (sys.n,):
        raise DomainError(f"x must have shape ({sys.n},)")
    if params.beta < sys.corrupted_fraction:
        raise DomainError(
            f"params.beta = {params.beta} is below the instance's corrupted "
            f"fraction {sys.corrupted_fraction}"
        )
    return x


def _subsample_quantiles(
    sys: LinearSystem, x: np.ndarray, q: float, D: int, trials: int, rng
) -> np.ndarray:
    """q-quantiles of observed |residuals| over `trials` independent
    with-replacement subsamples of size D, as one vectorized pass."""
    res = np.abs(sys.rows @ x - sys.rhs)
    idx = rng.integers(0, sys.m, size=(trials, D))
    vals = res[idx]
    rank = quantile_rank(q, D)
    part = np.partition(vals, rank - 1, axis=1)
    return part[:, rank - 1]


def verify_subquantile_upper(
    sys: LinearSystem,
    x: np.ndarray,
    params: TheoryParams,
    D: int,
    trials: int,
    rng: "RngHandle | int",
    mode: str = WITH_REPLACEMENT,
) -> MonteCarloReport:
    """Check that the size-D subsample quantile at level q stays at or below
    the clean-residual quantile at level q + beta + eps_u.

    The per-draw failure probability is bounded by exp(-KL(q || q+eps_u) D).
    In full-sample mode the inequality is deterministic, so it is evaluated
    once against a zero bound.
    """
    x = _sandwich_setup(sys, x, params)
    if trials < 1:
        raise DomainError("trials must be >= 1")
    q, beta = params.q, params.beta
    ceiling = uncorrupted_quantile(sys, x, q + beta + params.eps_u)
    label = (
        f"m={sys.m} n={sys.n} beta={beta} q={q} eps_u={params.eps_u} D={D}"
    )
    if mode == FULL_SAMPLE:
        spec = QuantileSpec(q, mode=FULL_SAMPLE)
        value = subsampled_residual_quantile(sys, x, spec, as_handle(0).generator())
        violations = int(value > ceiling)
        return make_report("subquantile_upper_full", label, 1, violations, 0.0)
    if mode != WITH_REPLACEMENT:
        raise DomainError(f"unsupported sampling mode {mode!r}")
    if D < 1:
        raise DomainError("D must be >= 1")
    gen = as_handle(rng).generator()
    kth = _subsample_quantiles(sys, x, q, D, trials, gen)
    violations = int(np.count_nonzero(kth > ceiling))
    bound = quantile_bound_failure(params, D, UPPER)
    return make_report("subquantile_upper", label, trials, violations, bound)


def verify_subquantile_lower(
    sys: LinearSystem,
    x: np.ndarray,
    params: TheoryParams,
    D: int,
    trials: int,
    rng: "RngHandle | int",
    mode: str = WITH_REPLACEMENT,
) -> MonteCarloReport:
    """Mirror of the upper check: the subsample quantile stays at or above
    the clean-residual quantile at level (q - beta - eps_l)/(1 - beta),
    restricted to uncorrupted rows, with bound exp(-KL(q || q-eps_l) D)."""
    x = _sandwich_setup(sys, x, params)
    if trials < 1:
        raise DomainError("trials must be >= 1")
    q, beta = params.q, params.beta
    level = (q - beta - params.eps_l) / (1.0 - beta)
    floor = uncorrupted_quantile(sys, x, level, restrict=sys.uncorrupted_set())
    label = (
        f"m={sys.m} n={sys.n} beta={beta} q={q} eps_l={params.eps_l} D={D}"
    )
    if mode == FULL_SAMPLE:
        spec = QuantileSpec(q, mode=FULL_SAMPLE)
        value = subsampled_residual_quantile(sys, x, spec, as_handle(0).generator())
        violations = int(value < floor)
        return make_report("subquantile_lower_full", label, 1, violations, 0.0)
    if mode != WITH_REPLACEMENT:
        raise DomainError(f"unsupported sampling mode {mode!r}")
    if D < 1:
        raise DomainError("D must be >= 1")
    gen = as_handle(rng).generator()
    kth = _subsample_quantiles(sys, x, q, D, trials, gen)
    violations = int(np.count_nonzero(kth < floor))
    bound = quantile_bound_failure(params, D, LOWER)
    return make_report("subquantile_lower", label, trials, violations, bound)


def power_sigma_max(rows: np.ndarray, rng) -> tuple[float, int]:
    """Largest singular value by power iteration on the Gram matrix.

    Deterministic given the generator state.  Raises ConvergenceFailure if
    the estimate has not stabilized to POWER_TOL within POWER_MAX_ITER
    sweeps, or if the iterate collapses.
    """
    m, n = rows.shape
    gram = rows.T @ rows
    v = rng.standard_normal(n)
    norm = np.linalg.norm(v)
    if norm == 0.0:
        raise ConvergenceFailure("degenerate start vector")
    v /= norm
    lam_prev = -1.0
    for it in range(1, POWER_MAX_ITER + 1):
        w = gram @ v
        lam = float(np.linalg.norm(w))
        if lam <= 0.0:
            raise ConvergenceFailure("power iterate collapsed to zero")
        v = w / lam
        if abs(lam - lam_prev) <= POWER_TOL * max(1.0, lam):
            return math.sqrt(lam), it
        lam_prev = lam
    raise ConvergenceFailure(
        f"power iteration did not stabilize within {POWER_MAX_ITER} sweeps"
    )


@dataclass(frozen=True)
class SpectralReport:
    """Scaled spectral estimates for one instance.

    ``sigma_min_alpha_scaled`` is the minimum over sampled subsets only; the
    true subset-infimum can only be smaller, so this is an upper estimate.
    ``above_floor`` compares it against the sqrt(2 pi) alpha0^{3/2} / 24
    floor, which holds with high probability rather than surely, so the flag
    is advisory.
    """

    m: int
    n: int
    alpha0: float
    subset_trials: int
    sigma_max_scaled: float
    power_iterations: int
    sigma_min_alpha_scaled: float
    lemma_floor: float
    above_floor: bool


def spectral_check(
    sys: LinearSystem,
    alpha0: float,
    subset_trials: int,
    rng: "RngHandle | int",
) -> SpectralReport:
    """Estimate sigma_max(A) sqrt(n/m) and sample an upper estimate of the
    subset-minimum singular value at subset fraction alpha0."""
    if not 0.0 < alpha0 <= 1.0:
        raise DomainError("alpha0 must lie in (0, 1]")
    if subset_trials < 1:
        raise DomainError("subset_trials must be >= 1")
    m, n = sys.m, sys.n
    size = math.ceil(alpha0 * m)
    if size < n:
        raise DomainError(
            f"subsets of size {size} are rank-deficient for n = {n}"
        )
    gen = as_handle(rng).generator()
    scale = math.sqrt(n / m)
    sigma_max, iters = power_sigma_max(sys.rows, gen)
    smallest = math.inf
    for _ in range(subset_trials):
        subset = gen.choice(m, size=size, replace=False)
        sing = np.linalg.svd(sys.rows[subset], compute_uv=False)
        smallest = min(smallest, float(sing[-1]) * scale)
    floor = math.sqrt(2.0 * math.pi) * alpha0**1.5 / 24.0
    return SpectralReport(
        m=m,
        n=n,
        alpha0=alpha0,
        subset_trials=subset_trials,
        sigma_max_scaled=sigma_max * scale,
        power_iterations=iters,
        sigma_min_alpha_scaled=smallest,
        lemma_floor=floor,
        above_floor=smallest >= floor,
    )


@dataclass(frozen=True)
class ChernoffGridReport:
    """Exhaustive dominance check up to N_max, in exact arithmetic."""

    n_max: int
    cells: int
    violations: int
    max_ratio: float
    float_mismatches: int


def verify_chernoff_grid(N_max: int) -> ChernoffGridReport:
    """For every N <= N_max, r on the 0.05 grid, and every k on the valid
    side of the mean, confirm exact tail <= closed-form bound in rational
    arithmetic; also confirm the float bound tracks the rational one.

    Returns the largest exact/bound ratio seen (1 exactly at the k = 0 and
    k = N corners, where the bound is tight).
    """
    if not 1 <= N_max <= 64:
        raise DomainError("N_max must lie in [1, 64]")
    cells = 0
    violations = 0
    max_ratio = Fraction(0)
    float_mismatches = 0
    for N in range(1, N_max + 1):
        for j in range(1, 20):
            r = Fraction(j, 20)
            pmf = [
                math.comb(N, k) * r**k * (1 - r) ** (N - k) for k in range(N + 1)
            ]
            # Lower tail P(X <= k) for k/N <= r.
            cdf = Fraction(0)
            for k in range(N + 1):
                cdf += pmf[k]
                if Fraction(k, N) > r:
                    break
                bound = chernoff_tail_exact(N, k, r)
                cells += 1
                if cdf > bound:
                    violations += 1
                ratio = cdf / bound
                if ratio > max_ratio:
                    max_ratio = ratio
                f = chernoff_tail(N, k, float(r))
                if abs(f - float(bound)) > 1e-9 * float(bound):
                    float_mismatches += 1
            # Upper tail P(X >= k) for k/N >= r.
            tail = Fraction(0)
            for k in range(N, -1, -1):
                tail += pmf[k]
                if Fraction(k, N) < r:
                    break
                bound = chernoff_tail_exact(N, k, r, side=UPPER)
                cells += 1
                if tail > bound:
                    violations += 1
                ratio = tail / bound
                if ratio > max_ratio:
                    max_ratio = ratio
                f = chernoff_tail(N, k, float(r), side=UPPER)
                if abs(f - float(bound)) > 1e-9 * float(bound):
                    float_mismatches += 1
    return ChernoffGridReport(
        n_max=N_max,
        cells=cells,
        violations=violations,
        max_ratio=float(max_ratio),
        float_mismatches=float_mismatches,
    )


REPORT_COLUMNS = (
    "check_name",
    "instance_params",
    "trials",
    "violations",
    "empirical_rate",
    "bound",
    "stderr",
    "pass",
)


def write_report_csv(reports, path: "str | Path") -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(REPORT_COLUMNS)
        for r in reports:
            writer.writerow(
                [
                    r.check_name,
                    r.instance_params,
                    r.trials,
                    r.violations,
                    format(r.empirical_rate, ".17g"),
                    format(r.theoretical_bound, ".17g"),
                    format(r.mc_stderr, ".17g"),
                    "1" if r.passed else "0",
                ]
            )
