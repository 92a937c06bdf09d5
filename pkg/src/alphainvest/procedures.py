"""Sequential testing procedures over a wealth/potential ledger.

Five kinds are supported: plain spending, plain investing, the generalized
framework, spending-with-rewards (scale parameter k), and the
expected-reward-optimal investing rule. A ProcedureState is a sequential
object: steps must be applied in order by a single writer; distinct states
may run in parallel.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from typing import Iterable, List, Optional, Tuple

from . import distributions as dist
from . import tradeoff
from .distributions import TestSpec
from .tradeoff import Allocation

DEPLETION_FLOOR = 1e-12


class ProcedureKind(str, Enum):
    ALPHA_SPENDING = "alpha_spending"
    ALPHA_INVESTING = "alpha_investing"
    GENERALIZED = "generalized"
    ASR = "asr"
    ERO = "ero"


class Scheme(str, Enum):
    CONSTANT = "constant"
    RELATIVE = "relative"
    RELATIVE_FIXED_M = "relative_fixed_m"


class ProcedureStopped(Exception):
    """The allocation rule's stopping condition is met."""


class InvalidAllocation(Exception):
    pass


class InsufficientWealth(Exception):
    pass


@dataclass(frozen=True)
class ProcedureConfig:
    kind: ProcedureKind
    alpha: float
    eta: Optional[float] = None  # defaults to 1 - alpha
    k: float = 1.0  # spending-with-rewards scale
    omega: Optional[float] = None  # plain-investing reward; defaults to alpha

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must be in (0, 1)")
        object.__setattr__(self, "eta", 1.0 - self.alpha if self.eta is None else self.eta)
        object.__setattr__(self, "omega", self.alpha if self.omega is None else self.omega)
        if self.eta <= 0:
            raise ValueError("eta must be positive")
        if self.omega < 0 or self.omega > self.alpha:
            raise ValueError("omega must be in [0, alpha]")
        if self.k < 1.0 - self.alpha:
            raise ValueError("k must be at least 1 - alpha")

    @property
    def gai_unit(self) -> float:
        """Factor converting this kind's wealth into potential units."""
        if self.kind == ProcedureKind.ASR:
            return self.k
        if self.kind == ProcedureKind.ALPHA_SPENDING:
            return 1.0 - self.alpha
        return 1.0


@dataclass(frozen=True)
class LedgerEntry:
    allocation: Allocation
    rejected: bool
    p_value: float
    wealth_after: float


@dataclass
class ProcedureState:
    config: ProcedureConfig
    wealth: float
    initial_wealth: float
    step_index: int = 0
    history: List[LedgerEntry] = field(default_factory=list)


@dataclass(frozen=True)
class AllocationRule:
    scheme: Scheme = Scheme.CONSTANT
    fraction: float = 0.1
    stop_threshold: float = 1e-3  # relative scheme: stop when W < W0 * threshold
    fixed_m: int = 200

    def __post_init__(self):
        if not 0.0 < self.fraction <= 1.0:
            raise ValueError("fraction must be in (0, 1]")
        if self.stop_threshold <= 0:
            raise ValueError("stop_threshold must be positive")
        if self.fixed_m < 1:
            raise ValueError("fixed_m must be positive")


def init(config: ProcedureConfig) -> ProcedureState:
    """Fresh state with the kind's initial wealth."""
    base = config.alpha * config.eta
    if config.kind == ProcedureKind.ASR:
        w0 = base / config.k
    elif config.kind == ProcedureKind.ALPHA_SPENDING:
        w0 = base / (1.0 - config.alpha)
    else:
        w0 = base
    return ProcedureState(config=config, wealth=w0, initial_wealth=w0)


def should_stop(state: ProcedureState, rule: AllocationRule) -> bool:
    if rule.scheme == Scheme.RELATIVE_FIXED_M:
        return state.step_index >= rule.fixed_m
    if rule.scheme == Scheme.RELATIVE:
        return state.wealth < state.initial_wealth * rule.stop_threshold
    return state.wealth <= DEPLETION_FLOOR


def budget(state: ProcedureState, rule: AllocationRule) -> float:
    """Pool withdrawal for the next test, in the state's own wealth units."""
    if rule.scheme == Scheme.CONSTANT:
        return min(state.initial_wealth * rule.fraction, state.wealth)
    return state.wealth * rule.fraction


# the optimal-level solve is pure; trajectories across Monte-Carlo runs share
# long prefixes, so caching pays off
_ero_cached = lru_cache(maxsize=1_000_000)(tradeoff.ero_level)


def propose(state: ProcedureState, rule: AllocationRule, spec: TestSpec,
            triple: Optional[Allocation] = None) -> Allocation:
    """Allocation for the next test under the state's kind and the rule's budget.

    For the generalized kind the caller supplies the triple, which is
    validated against the reward constraint.
    """
    if should_stop(state, rule):
        raise ProcedureStopped
    cfg = state.config
    c = budget(state, rule)
    kind = cfg.kind

    if kind == ProcedureKind.GENERALIZED:
        if triple is None:
            raise InvalidAllocation("generalized procedures need a caller-supplied triple")
        if triple.cost > state.wealth + 1e-12:
            raise InvalidAllocation("cost exceeds available wealth")
        rho = dist.best_power(spec, triple.level)
        if not tradeoff.constraint_satisfied(triple, rho, cfg.alpha):
            raise InvalidAllocation("reward violates the admissible cap")
        return triple

    if kind == ProcedureKind.ALPHA_SPENDING:
        # equivalent generalized triple has cost (1 - alpha) * level, no reward
        return Allocation(cost=(1.0 - cfg.alpha) * c, reward=0.0, level=c)
    if kind == ProcedureKind.ALPHA_INVESTING:
        return Allocation(cost=c, reward=c + cfg.omega, level=c / (1.0 + c))
    if kind == ProcedureKind.ASR:
        # the rule's budget is in this kind's own wealth units, which are the
        # level units; the generalized-frame cost is k times the level
        level = c
        rho = dist.best_power(spec, level)
        reward = min(level / rho + cfg.alpha / cfg.k, 1.0 - (1.0 - cfg.alpha) / cfg.k)
        return Allocation(cost=cfg.k * level, reward=max(0.0, reward), level=level)
    # expected-reward-optimal investing
    level, reward = _ero_cached(spec, c, cfg.alpha)
    return Allocation(cost=c, reward=reward, level=level)


def step(state: ProcedureState, allocation: Allocation, p_value: float) -> ProcedureState:
    """Apply one test outcome; returns the successor state."""
    if not 0.0 <= p_value <= 1.0:
        raise ValueError("p_value must be in [0, 1]")
    cfg = state.config
    rejected = p_value <= allocation.level
    if cfg.kind in (ProcedureKind.ASR, ProcedureKind.ALPHA_SPENDING):
        charge = allocation.level
    else:
        charge = allocation.cost
    if charge > state.wealth + 1e-12:
        raise InsufficientWealth(f"charge {charge} exceeds wealth {state.wealth}")
    wealth = state.wealth - charge + (allocation.reward if rejected else 0.0)
    if wealth < 0.0:
        if wealth < -1e-9:
            raise InsufficientWealth("wealth went negative")
        wealth = 0.0
    entry = LedgerEntry(allocation=allocation, rejected=rejected,
                        p_value=p_value, wealth_after=wealth)
    return ProcedureState(config=cfg, wealth=wealth,
                          initial_wealth=state.initial_wealth,
                          step_index=state.step_index + 1,
                          history=state.history + [entry])


def run(state: ProcedureState, rule: AllocationRule,
        stream: Iterable[Tuple[TestSpec, float]]) -> Tuple[ProcedureState, Tuple[int, int]]:
    """Propose and step through the stream until the rule stops."""
    for spec, p_value in stream:
        if should_stop(state, rule):
            break
        allocation = propose(state, rule, spec)
        state = step(state, allocation, p_value)
    else:
        if not should_stop(state, rule):
            raise RuntimeError("stream exhausted before the stopping condition")
    tests = state.step_index
    rejects = sum(1 for e in state.history if e.rejected)
    return state, (tests, rejects)


def mfdr_hat(total_false_rejects: float, total_rejects: float, eta: float) -> float:
    """Plug-in false-discovery estimate: false rejects over rejects + eta."""
    if total_false_rejects < 0 or total_rejects < 0:
        raise ValueError("totals must be non-negative")
    if eta <= 0:
        raise ValueError("eta must be positive")
    return total_false_rejects / (total_rejects + eta)


def audit_constraint(state: ProcedureState, spec: TestSpec, tol: float = 1e-12) -> bool:
    """Check every executed allocation against the reward cap, in potential units."""
    cfg = state.config
    for entry in state.history:
        alloc = entry.allocation
        reward = alloc.reward * (cfg.k if cfg.kind == ProcedureKind.ASR else 1.0)
        rho = dist.best_power(spec, alloc.level)
        gai = Allocation(cost=alloc.cost, reward=reward, level=alloc.level)
        if not tradeoff.constraint_satisfied(gai, rho, cfg.alpha, tol=tol):
            return False
    return True


def ledger_jsonl(state: ProcedureState) -> str:
    """One JSON record per step, the same layout the service journal uses."""
    lines = []
    for j, e in enumerate(state.history, start=1):
        lines.append(json.dumps({
            "j": j,
            "cost": e.allocation.cost,
            "reward": e.allocation.reward,
            "level": e.allocation.level,
            "p_value": e.p_value,
            "rejected": e.rejected,
            "wealth_after": e.wealth_after,
        }))
    return "\n".join(lines) + ("\n" if lines else "")
