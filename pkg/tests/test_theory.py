"""Closed-form bounds: frozen values, exact rational corners, domains."""

import math
from fractions import Fraction

import pytest

from _oracles import binom_cdf, binom_sf
from qkaczmarz.errors import DomainError, SideMismatch
from qkaczmarz.theory import (
    LOWER,
    UPPER,
    TheoryParams,
    chernoff_tail,
    chernoff_tail_exact,
    disaster_probability,
    fast_contraction_floor,
    kl_bernoulli,
    max_subsample_lower,
    min_subsample_upper,
    phi_bound,
    quantile_bound_failure,
    union_failure_bound,
)


def test_kl_frozen_values():
    # Independent high-precision evaluation of
    # p log(p/r) + (1-p) log((1-p)/(1-r)) at (0.2, 0.5).
    assert kl_bernoulli(0.2, 0.5) == pytest.approx(0.19274475702175753, abs=0, rel=1e-15)
    assert kl_bernoulli(0.0, 0.5) == pytest.approx(math.log(2.0), rel=1e-15)
    assert kl_bernoulli(1.0, 0.5) == pytest.approx(math.log(2.0), rel=1e-15)
    assert kl_bernoulli(0.5, 0.5) == 0.0
    # Symmetry under complementing both arguments.
    assert kl_bernoulli(0.3, 0.7) == pytest.approx(kl_bernoulli(0.7, 0.3), rel=1e-15)


def test_kl_properties():
    # Nonnegative, zero only at p = r, and above the Pinsker floor 2(p-r)^2.
    for p in (0.0, 0.1, 0.25, 0.5, 0.8, 1.0):
        for r in (0.05, 0.3, 0.5, 0.9):
            v = kl_bernoulli(p, r)
            assert v >= 2.0 * (p - r) ** 2 - 1e-15
            if p == r:
                assert v == 0.0
            else:
                assert v > 0.0
    with pytest.raises(DomainError):
        kl_bernoulli(-0.1, 0.5)
    with pytest.raises(DomainError):
        kl_bernoulli(1.1, 0.5)
    with pytest.raises(DomainError):
        kl_bernoulli(0.5, 0.0)
    with pytest.raises(DomainError):
        kl_bernoulli(0.5, 1.0)


def test_chernoff_frozen_values():
    # exp(-10 * KL(0.2 || 0.5)), which must dominate the exact lower tail
    # P(Bin(10, 1/2) <= 2) = 56/1024.
    got = chernoff_tail(10, 2, 0.5)
    assert got == pytest.approx(0.14551915228366838, abs=0, rel=1e-15)
    assert got >= 56.0 / 1024.0
    # k = N r makes the exponent vanish on both sides.
    assert chernoff_tail(10, 5, 0.5) == 1.0
    assert chernoff_tail(10, 5, 0.5, UPPER) == 1.0


def test_chernoff_exact_corners():
    # At k = 0 the bound collapses to (1-r)^N, the exact point mass.
    assert chernoff_tail_exact(1, 0, Fraction(1, 2)) == Fraction(1, 2)
    assert chernoff_tail_exact(4, 0, Fraction(1, 4)) == Fraction(3, 4) ** 4
    # Mirrored corner: P(Bin(N, r) >= N) = r^N, and the bound is exact there.
    assert chernoff_tail_exact(4, 4, Fraction(1, 4), side=UPPER) == Fraction(1, 4) ** 4
    # Frozen interior value.
    assert chernoff_tail_exact(10, 2, Fraction(1, 2)) == Fraction(9765625, 67108864)


def test_chernoff_side_checks():
    with pytest.raises(SideMismatch):
        chernoff_tail(10, 8, 0.5)  # k/N above r on the lower side
    with pytest.raises(SideMismatch):
        chernoff_tail(10, 2, 0.5, UPPER)
    with pytest.raises(SideMismatch):
        chernoff_tail_exact(10, 8, Fraction(1, 2))
    with pytest.raises(DomainError):
        chernoff_tail(10, 2, 0.5, side="two-sided")
    with pytest.raises(DomainError):
        chernoff_tail(0, 0, 0.5)
    with pytest.raises(DomainError):
        chernoff_tail(10, 11, 0.5, UPPER)
    with pytest.raises(DomainError):
        chernoff_tail(10, 2, 0.0)


def test_chernoff_dominates_exact_tails():
    # Spot grid against the independent rational CDF oracle.
    for N in (1, 2, 5, 13, 24):
        for r in (Fraction(1, 5), Fraction(1, 2), Fraction(7, 10)):
            for k in range(N + 1):
                if Fraction(k, N) <= r:
                    assert binom_cdf(N, k, r) <= chernoff_tail_exact(N, k, r)
                if Fraction(k, N) >= r:
                    assert binom_sf(N, k, r) <= chernoff_tail_exact(N, k, r, UPPER)


def test_quantile_bound_failure():
    p = TheoryParams(q=0.5, beta=0.01, eps_l=0.125, eps_u=0.2)
    up = quantile_bound_failure(p, 40, UPPER)
    low = quantile_bound_failure(p, 40, LOWER)
    assert up == pytest.approx(math.exp(-40 * kl_bernoulli(0.5, 0.7)), rel=1e-15)
    assert low == pytest.approx(math.exp(-40 * kl_bernoulli(0.5, 0.375)), rel=1e-15)
    # Monotone decreasing in D, and wider windows fail less.
    assert quantile_bound_failure(p, 80, UPPER) < up
    wide = TheoryParams(q=0.5, beta=0.01, eps_l=0.125, eps_u=0.3)
    assert quantile_bound_failure(wide, 40, UPPER) < up
    with pytest.raises(DomainError):
        quantile_bound_failure(p, 0, UPPER)
    with pytest.raises(DomainError):
        quantile_bound_failure(p, 40, "sideways")


def test_union_failure_bound():
    p = TheoryParams(q=0.5, beta=0.01, eps_l=0.125, eps_u=0.2)
    per = quantile_bound_failure(p, 120, UPPER)
    assert 500 * per < 1.0
    assert union_failure_bound(p, 120, 500) == pytest.approx(500 * per, rel=1e-15)
    # Clipped at one for small D.
    assert union_failure_bound(p, 1, 10_000) == 1.0
    with pytest.raises(DomainError):
        union_failure_bound(p, 60, 0)


def test_union_bound_guarantee_regime():
    # At the guarantee's operating point (window edge pushed toward 1-q so
    # that KL(q || q+eps_u) >= 5 ln T / D + ((1-q)/4) ln(1/beta)), the union
    # bound sits below T^-5 times the advertised decay.
    q, beta, T = 0.5, 0.01, 20_000
    params = TheoryParams(q=q, beta=beta, eps_u=0.48)
    D = min_subsample_upper(q, beta, T)
    lhs = union_failure_bound(params, D, T)
    rhs = T**-5.0 * math.exp(-((1 - q) / 4.0) * math.log(1.0 / beta) * D)
    assert 0.0 < lhs <= rhs


def test_min_subsample_upper():
    assert min_subsample_upper(0.5, 0.01, 20_000) == 104
    # C log T / log(1/beta) with everything equal to one.
    assert min_subsample_upper(0.5, math.exp(-1), math.e, 1.0) == 1
    # Monotone: longer horizons and milder corruption need larger subsamples.
    assert min_subsample_upper(0.5, 0.01, 40_000) >= 104
    assert min_subsample_upper(0.5, 0.1, 20_000) > 104
    with pytest.raises(DomainError):
        min_subsample_upper(0.5, 0.01, 1)
    with pytest.raises(DomainError):
        min_subsample_upper(0.5, 1.5, 100)
    with pytest.raises(DomainError):
        min_subsample_upper(1.0, 0.01, 100)
    with pytest.raises(DomainError):
        min_subsample_upper(0.5, 0.01, 100, C_override=0.0)


def test_max_subsample_lower():
    assert max_subsample_lower(0.01, 20_000) == 1
    # log T = 0: the floor turns negative-free and the minimum of 1 applies.
    assert max_subsample_lower(0.5, 1) == 1
    # A horizon long enough for the floor to exceed 1.
    assert max_subsample_lower(0.5, 10**9, c0=0.5) == math.floor(
        0.5 * math.log(10**9) / math.log(4.0)
    )
    with pytest.raises(DomainError):
        max_subsample_lower(0.01, 0.5)
    with pytest.raises(DomainError):
        max_subsample_lower(0.0, 100)
    with pytest.raises(DomainError):
        max_subsample_lower(0.01, 100, c0=1.0)


def test_disaster_probability():
    assert disaster_probability(1.0, 1) == 0.25
    assert disaster_probability(0.1, 1) == pytest.approx(0.05**2, rel=1e-15)
    assert disaster_probability(0.1, 3) == pytest.approx(0.05**4, rel=1e-15)
    with pytest.raises(DomainError):
        disaster_probability(0.0, 1)
    with pytest.raises(DomainError):
        disaster_probability(1.1, 1)
    with pytest.raises(DomainError):
        disaster_probability(0.5, 0)


def test_fast_contraction_floor():
    # kappa = 2C/n makes the floor exactly one half.
    assert fast_contraction_floor(100, 0.02, 1.0) == pytest.approx(0.5, rel=1e-15)
    assert fast_contraction_floor(1000, 0.5, 1.0) == pytest.approx(0.998, rel=1e-12)
    with pytest.raises(DomainError):
        fast_contraction_floor(10, 0.05, 1.0)  # 1 - 1/(0.5) = -1: vacuous
    with pytest.raises(DomainError):
        fast_contraction_floor(10, 1.5, 1.0)
    with pytest.raises(DomainError):
        fast_contraction_floor(0, 0.5, 1.0)
    with pytest.raises(DomainError):
        fast_contraction_floor(10, 0.5, 0.0)


def test_phi_bound():
    assert phi_bound(1.0, 0.75) == pytest.approx(2.0, rel=1e-15)
    assert phi_bound(1.0, 0.0) == 1.0
    assert phi_bound(3.0, 0.5) == pytest.approx(3.0 / math.sqrt(0.5), rel=1e-15)
    with pytest.raises(DomainError):
        phi_bound(-1.0, 0.5)
    with pytest.raises(DomainError):
        phi_bound(1.0, 1.0)


def test_theory_params_defaults():
    p = TheoryParams(q=0.5, beta=0.01)
    assert p.eps_l == 0.125  # q / 4
    assert p.eps_u == 0.1
    assert p.alpha == pytest.approx(0.5 - 0.01 - 0.125, rel=1e-15)
    assert p.alpha_prime == pytest.approx((0.5 - 0.01 - 0.125) / 0.99, rel=1e-15)
    assert p.C1_upper == pytest.approx(48.0, rel=1e-15)  # 24 / (1 - q)
    assert p.c0_lower == 0.5
    assert p.kappa is None


def test_theory_params_validation():
    with pytest.raises(DomainError):
        TheoryParams(q=0.0, beta=0.01)
    with pytest.raises(DomainError):
        TheoryParams(q=0.5, beta=0.01, eps_l=0.6)  # eps_l >= q
    with pytest.raises(DomainError):
        TheoryParams(q=0.5, beta=0.01, eps_u=0.5)  # eps_u >= 1 - q
    # beta must stay below min(q - eps_l, 1 - q - eps_u).
    with pytest.raises(DomainError):
        TheoryParams(q=0.5, beta=0.40, eps_l=0.125, eps_u=0.2)
    with pytest.raises(DomainError):
        TheoryParams(q=0.5, beta=0.01, kappa=1.5)
    with pytest.raises(DomainError):
        TheoryParams(q=0.5, beta=0.01, C1_upper=-1.0)
    with pytest.raises(DomainError):
        TheoryParams(q=0.5, beta=0.01, c0_lower=0.0)


def test_subsample_window_inversion():
    # At practical horizons the guarantee's minimum exceeds the failure
    # statement's maximum: the two regimes do not overlap.
    p = TheoryParams(q=0.5, beta=0.01)
    lo, hi = p.subsample_window(20_000)
    assert (lo, hi) == (104, 1)
    assert lo > hi
    with pytest.raises(DomainError):
        TheoryParams(q=0.5, beta=0.0).subsample_window(100)
