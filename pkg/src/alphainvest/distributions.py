"""Distribution functions, power, best power, sample-size and level-sample
computations for the supported test families.

All operations are pure functions; thread-safe.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum
from functools import lru_cache
from typing import Optional

from scipy import special, stats


class Family(str, Enum):
    Z_KNOWN_SIGMA = "z_known_sigma"
    T_ONE_SAMPLE = "t_one_sample"
    NEYMAN_PEARSON_SIMPLE = "neyman_pearson_simple"


class AlternativeKind(str, Enum):
    SIMPLE = "simple"
    BOUNDED_ONE_SIDED = "bounded_one_sided"
    UNBOUNDED_ONE_SIDED = "unbounded_one_sided"


@dataclass(frozen=True)
class Alternative:
    kind: AlternativeKind
    theta: Optional[float] = None  # theta1 for simple, theta_max for bounded

    @staticmethod
    def simple(theta1: float) -> "Alternative":
        return Alternative(AlternativeKind.SIMPLE, theta1)

    @staticmethod
    def bounded_one_sided(theta_max: float) -> "Alternative":
        return Alternative(AlternativeKind.BOUNDED_ONE_SIDED, theta_max)

    @staticmethod
    def unbounded_one_sided() -> "Alternative":
        return Alternative(AlternativeKind.UNBOUNDED_ONE_SIDED, None)


@dataclass(frozen=True)
class TestSpec:
    """A right-tailed test about a location parameter.

    For the t family the effect scale is standardized, i.e. the noncentrality
    at n samples is (theta - null_value) * sqrt(n).
    """

    family: Family
    null_value: float = 0.0
    alternative: Alternative = Alternative.unbounded_one_sided()
    sigma: Optional[float] = None  # z family only
    n: Optional[int] = None  # samples behind the statistic; t dof = n - 1

    def __post_init__(self):
        if self.family == Family.Z_KNOWN_SIGMA:
            if self.sigma is None or self.sigma <= 0:
                raise ValueError("z family requires a positive sigma")
        elif self.sigma is not None:
            raise ValueError("sigma is only meaningful for the z family")
        if self.family == Family.NEYMAN_PEARSON_SIMPLE:
            if self.alternative.kind != AlternativeKind.SIMPLE:
                raise ValueError("Neyman-Pearson tests need a simple alternative")
        if self.alternative.theta is not None and self.alternative.theta <= self.null_value:
            raise ValueError("right-tailed alternatives must lie above the null value")
        if self.n is not None and self.n < 1:
            raise ValueError("n must be a positive integer")

    def with_n(self, n: int) -> "TestSpec":
        return replace(self, n=n)

    @property
    def scale(self) -> float:
        """Per-sample standard deviation of the effect scale."""
        return self.sigma if self.family == Family.Z_KNOWN_SIGMA else 1.0


@dataclass(frozen=True)
class PowerEvaluation:
    level: float
    best_power: float
    actual_power: float


@dataclass(frozen=True)
class TestRequest:
    """A test whose sample count is decided by the database manager.

    effect_size is in data units for the z family and in standardized units
    for the t family.
    """

    spec: TestSpec
    effect_size: float
    required_power: float

    def __post_init__(self):
        if self.effect_size <= 0:
            raise ValueError("effect_size must be positive")
        if not 0 < self.required_power < 1:
            raise ValueError("required_power must be in (0, 1)")


def std_normal_cdf(x: float) -> float:
    """Standard normal CDF, absolute error below 1e-12."""
    if math.isnan(x):
        raise ValueError("x must be finite")
    return float(special.ndtr(x))


def std_normal_quantile(p: float) -> float:
    """Inverse of std_normal_cdf; raises for p outside (0, 1)."""
    if not 0.0 < p < 1.0:
        raise ValueError(f"quantile argument must be in (0, 1), got {p}")
    return float(special.ndtri(p))


def noncentral_t_cdf(x: float, df: int, ncp: float) -> float:
    """CDF of the noncentral t distribution; central t when ncp == 0."""
    if df < 1:
        raise ValueError("df must be >= 1")
    if ncp == 0.0:
        return float(stats.t.cdf(x, df))
    val = float(stats.nct.cdf(x, df, ncp))
    if math.isnan(val):
        # scipy's series fails deep in the tails for large |ncp|; fall back
        # to quadrature over the chi mixing density:
        # P(T <= x) = E_chi[Phi(x * U / sqrt(df) - ncp)], U ~ chi(df)
        from scipy import integrate

        chi = stats.chi(df)
        val, _ = integrate.quad(
            lambda u: special.ndtr(x * u / math.sqrt(df) - ncp) * chi.pdf(u),
            0.0, math.inf)
        val = min(1.0, max(0.0, float(val)))
    return val


def _standardized_shift(spec: TestSpec, theta: float) -> float:
    if spec.n is None:
        raise ValueError("spec.n must be set to evaluate power")
    return (theta - spec.null_value) * math.sqrt(spec.n) / spec.scale


def power(spec: TestSpec, level: float, theta: float) -> float:
    """Probability of rejection at the given level when theta is true."""
    if not 0.0 < level < 1.0:
        raise ValueError("level must be in (0, 1)")
    if spec.n is None:
        raise ValueError("spec.n must be set to evaluate power")
    shift = _standardized_shift(spec, theta)
    if spec.family in (Family.Z_KNOWN_SIGMA, Family.NEYMAN_PEARSON_SIMPLE):
        # Phi(shift + Phi^-1(level)) == Phi(shift - Phi^-1(1 - level)), but
        # stays accurate when level is far below machine epsilon
        return std_normal_cdf(shift + std_normal_quantile(level))
    df = spec.n - 1
    if df < 1:
        raise ValueError("t family requires n >= 2")
    crit = float(stats.t.ppf(1.0 - level, df))
    if shift == 0.0:
        # exact size at the null, free of the noncentral series' tolerance
        return level
    return 1.0 - noncentral_t_cdf(crit, df, shift)


def best_power(spec: TestSpec, level: float) -> float:
    """Supremum of power over the alternative hypothesis."""
    alt = spec.alternative
    if alt.kind == AlternativeKind.UNBOUNDED_ONE_SIDED:
        return 1.0
    return power(spec, level, alt.theta)


def evaluate(spec: TestSpec, level: float, theta: float) -> PowerEvaluation:
    return PowerEvaluation(level=level, best_power=best_power(spec, level),
                           actual_power=power(spec, level, theta))


DEFAULT_N_CAP = 10**7


class SampleCapExceeded(Exception):
    """No sample count up to the configured cap reaches the required power."""


def required_n(request: TestRequest, level: float, cap: int = DEFAULT_N_CAP) -> int:
    """Minimal n at which the request's power target is met at this level."""
    if not 0.0 < level < 1.0:
        raise ValueError("level must be in (0, 1)")
    spec = request.spec
    target = request.required_power
    theta = spec.null_value + request.effect_size

    def ok(n: int) -> bool:
        # tiny slack so level_sample(n) round-trips to <= n despite the
        # CDF/quantile pair not being exact inverses at machine precision
        return power(spec.with_n(n), level, theta) >= target - 1e-9

    if spec.family in (Family.Z_KNOWN_SIGMA, Family.NEYMAN_PEARSON_SIMPLE):
        shift = -std_normal_quantile(level) + std_normal_quantile(target)
        n_guess = max(1, math.ceil((shift * spec.scale / request.effect_size) ** 2))
        if n_guess > cap:
            if not ok(cap):
                raise SampleCapExceeded(
                    f"no n <= {cap} reaches power {target} at level {level}")
            n_guess = cap
        # guard the ceiling against boundary rounding
        while n_guess > 1 and ok(n_guess - 1):
            n_guess -= 1
        while not ok(n_guess):
            n_guess += 1
            if n_guess > cap:
                raise SampleCapExceeded(f"no n <= {cap} reaches power {target} at level {level}")
        return n_guess

    lo, hi = 2, 4
    while not ok(hi):
        lo, hi = hi, hi * 2
        if hi > cap:
            raise SampleCapExceeded(f"no n <= {cap} reaches power {target} at level {level}")
    while lo < hi:
        mid = (lo + hi) // 2
        if ok(mid):
            hi = mid
        else:
            lo = mid + 1
    return lo


def level_sample(request: TestRequest, n: int) -> float:
    """Minimal feasible level at which n samples deliver the required power.

    Returns 1.0 when the power target is unreachable at any level below one;
    callers treat that as infeasible. Monotone non-increasing in n.
    """
    spec = request.spec
    target = request.required_power
    if spec.family in (Family.Z_KNOWN_SIGMA, Family.NEYMAN_PEARSON_SIMPLE):
        if n < 1:
            raise ValueError("n must be >= 1")
        arg = request.effect_size * math.sqrt(n) / spec.scale - std_normal_quantile(target)
        return 1.0 - std_normal_cdf(arg)
    if n < 2:
        raise ValueError("t family requires n >= 2")
    return _level_sample_t(n, request.effect_size, target)


@lru_cache(maxsize=200_000)
def _level_sample_t(n: int, effect: float, target: float) -> float:
    spec = TestSpec(Family.T_ONE_SAMPLE, alternative=Alternative.unbounded_one_sided()).with_n(n)
    theta = effect

    def gamma(level: float) -> float:
        return power(spec, level, theta)

    # power is monotone non-decreasing in level: bisect log-level for the
    # crossing, keeping relative accuracy for very small feasible levels
    lo, hi = math.log(1e-300), math.log(1.0 - 1e-12)
    if gamma(math.exp(hi)) < target:
        return 1.0
    if gamma(math.exp(lo)) >= target:
        return math.exp(lo)
    while hi - lo > 1e-10:
        mid = 0.5 * (lo + hi)
        if gamma(math.exp(mid)) >= target:
            hi = mid
        else:
            lo = mid
    return math.exp(hi)
