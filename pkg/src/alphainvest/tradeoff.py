"""Level/reward trade-off for generalized wealth-investing procedures.

Given a withdrawal `cost` from the potential pool, the reward credited on a
rejection is capped by

    reward <= min(cost / best_power(level) + alpha, cost / level + alpha - 1)

The two branches cross at a 'knee' which maximizes the expected reward; the
solver below locates it for the supported test families.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import List, Sequence, Tuple

import numpy as np

from . import distributions as dist
from .distributions import AlternativeKind, Family, TestSpec


class SolverFailure(Exception):
    """No sign change found when bracketing the knee equation."""


class Branch(str, Enum):
    POWER_BRANCH = "power_branch"
    LEVEL_BRANCH = "level_branch"
    KNEE = "knee"


@dataclass(frozen=True)
class Allocation:
    """One test's funding triple: pool withdrawal, rejection reward, level."""

    cost: float
    reward: float
    level: float

    def __post_init__(self):
        if self.cost < 0 or self.reward < 0:
            raise ValueError("cost and reward must be non-negative")
        if not 0.0 < self.level < 1.0:
            raise ValueError("level must be in (0, 1)")


@dataclass(frozen=True)
class TradeoffPoint:
    level: float
    reward: float
    binding: Branch


def max_reward(cost: float, level: float, rho_bar: float, alpha: float) -> float:
    """Largest admissible reward for the triple, clamped below at zero."""
    if cost < 0:
        raise ValueError("cost must be non-negative")
    if not 0.0 < level < 1.0:
        raise ValueError("level must be in (0, 1)")
    if not 0.0 < rho_bar <= 1.0:
        raise ValueError("rho_bar must be in (0, 1]")
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must be in (0, 1)")
    return max(0.0, min(cost / rho_bar + alpha, cost / level + alpha - 1.0))


def constraint_satisfied(alloc: Allocation, rho_bar: float, alpha: float,
                         tol: float = 1e-12) -> bool:
    """Audit an executed allocation against the reward inequality."""
    cap = min(alloc.cost / rho_bar + alpha, alloc.cost / alloc.level + alpha - 1.0)
    return -tol <= alloc.reward <= cap + tol


def tradeoff_curve(spec: TestSpec, cost: float, alpha: float,
                   grid: Sequence[float]) -> List[TradeoffPoint]:
    """Evaluate the reward cap along a grid of levels, tagging the binding branch."""
    points = []
    for level in grid:
        rho = dist.best_power(spec, level)
        power_branch = cost / rho + alpha
        level_branch = cost / level + alpha - 1.0
        reward = max(0.0, min(power_branch, level_branch))
        if math.isclose(power_branch, level_branch, rel_tol=1e-9, abs_tol=1e-12):
            binding = Branch.KNEE
        elif power_branch < level_branch:
            binding = Branch.POWER_BRANCH
        else:
            binding = Branch.LEVEL_BRANCH
        points.append(TradeoffPoint(level=level, reward=reward, binding=binding))
    return points


def ero_level(spec: TestSpec, cost: float, alpha: float) -> Tuple[float, float]:
    """Level and reward at the crossing of the two reward-cap branches.

    Solves cost/best_power(level) = cost/level - 1. The returned reward equals
    both branches of the cap (up to solver tolerance).
    """
    if cost <= 0:
        raise ValueError("cost must be positive")
    if spec.alternative.kind == AlternativeKind.UNBOUNDED_ONE_SIDED:
        # best power is identically 1: closed form, bit-compatible with the
        # plain investing rule level
        level = cost / (1.0 + cost)
        return level, cost / level + alpha - 1.0

    def g(level: float) -> float:
        return cost / level - cost / dist.best_power(spec, level) - 1.0

    upper = min(1.0 - 1e-8, cost / (1.0 - alpha))
    lower = min(1e-8, upper * 1e-6)
    # g > 0 near zero and g(upper) <= -alpha, so a bracket always exists for
    # the supported families; push the floor down until g is positive there
    # (the knee sits just below `cost` when cost is tiny), then scan
    # log-spaced points for the sign change
    while g(lower) < 0.0:
        lower *= 1e-6
        if lower < 1e-300:
            raise SolverFailure("knee equation already negative at the scan floor")
    grid = np.geomspace(lower, upper, 64)
    lo = None
    prev = grid[0]
    for x in grid[1:]:
        val = g(x)
        if val <= 0.0:
            lo, hi = prev, x
            break
        prev = x
    else:
        raise SolverFailure("no sign change found for the knee equation")
    # bisect to relative precision so the residual stays tiny even for
    # knee levels many orders of magnitude below one
    for _ in range(200):
        if hi - lo <= 1e-14 * hi:
            break
        mid = 0.5 * (lo + hi)
        if g(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    level = 0.5 * (lo + hi)
    return level, cost / level + alpha - 1.0


ORACLE_GRID_SIZE = 100_000


def ero_oracle(spec: TestSpec, cost: float, alpha: float, theta: float,
               grid_size: int = ORACLE_GRID_SIZE) -> float:
    """Grid-search maximizer of expected reward; test oracle only.

    Maximizes power(level, theta) * max_reward(level) over a uniform level
    grid and returns the argmax level.
    """
    levels = np.linspace(1e-7, 1.0 - 1e-7, grid_size)
    gamma = _power_vec(spec, levels, theta)
    if spec.alternative.kind == AlternativeKind.UNBOUNDED_ONE_SIDED:
        rho = np.ones_like(levels)
    else:
        rho = _power_vec(spec, levels, spec.alternative.theta)
    caps = np.minimum(cost / rho + alpha, cost / levels + alpha - 1.0)
    objective = gamma * np.clip(caps, 0.0, None)
    return float(levels[int(np.argmax(objective))])


def _power_vec(spec: TestSpec, levels: np.ndarray, theta: float) -> np.ndarray:
    """Vectorized rejection probability over a level grid."""
    from scipy import special, stats

    if spec.n is None:
        raise ValueError("spec.n must be set")
    shift = (theta - spec.null_value) * math.sqrt(spec.n) / spec.scale
    if spec.family in (Family.Z_KNOWN_SIGMA, Family.NEYMAN_PEARSON_SIMPLE):
        return special.ndtr(shift - special.ndtri(1.0 - levels))
    df = spec.n - 1
    crit = stats.t.ppf(1.0 - levels, df)
    if shift == 0.0:
        return levels.copy()
    return 1.0 - stats.nct.cdf(crit, df, shift)
