"""Quality-preserving database manager: cost quoting, level allocation,
sample accounting and wealth updates.

Three variants are provided: a spending-only manager that controls the
family-wise error rate, a rewards manager that controls the marginal false
discovery rate, and an optimistic two-pool rewards manager that hands out the
reward pool ahead of time using the empirical rejection rate.

A state instance is a strictly serialized machine: quote/execute pairs must
not interleave with other executions on the same state.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import List, Optional, Tuple

from . import distributions as dist
from .distributions import Alternative, AlternativeKind, TestRequest


class QpdVariant(str, Enum):
    AS = "as"
    ASR = "asr"
    ASR_OPT = "asr_opt"


class InfeasibleRequest(Exception):
    """No cost up to the search cap satisfies the level inequality."""


@dataclass(frozen=True)
class QpdConfig:
    variant: QpdVariant
    alpha: float
    eta: Optional[float] = None  # defaults to 1 - alpha
    q: float = 0.999
    n0: int = 1
    k: float = 1.0
    max_cost: int = 100_000

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must be in (0, 1)")
        object.__setattr__(self, "eta", 1.0 - self.alpha if self.eta is None else self.eta)
        if self.eta <= 0:
            raise ValueError("eta must be positive")
        if not 0.0 < self.q < 1.0:
            raise ValueError("q must be in (0, 1)")
        if self.n0 < 0:
            raise ValueError("n0 must be a non-negative integer")
        if self.k < 1.0 - self.alpha:
            raise ValueError("k must be at least 1 - alpha")
        if self.max_cost < 1:
            raise ValueError("max_cost must be positive")

    @property
    def initial_wealth(self) -> float:
        if self.variant == QpdVariant.AS:
            return self.alpha
        if self.variant == QpdVariant.ASR:
            return self.alpha * self.eta / self.k
        return self.alpha * self.eta  # two-pool: decaying pool only


@dataclass(frozen=True)
class CostQuote:
    cost: int  # additional samples required
    level: float
    n_after: int
    stability_bound: Optional[float] = None


@dataclass(frozen=True)
class QpdLedgerEntry:
    request: TestRequest
    quote: CostQuote
    rejected: bool
    p_value: float
    pool_a_after: float
    pool_b_after: float


@dataclass(frozen=True)
class QpdState:
    config: QpdConfig
    pool_a: float
    pool_b: float
    n: int
    tests_done: int = 0
    rejections: int = 0
    ledger: Tuple[QpdLedgerEntry, ...] = ()


def init_state(config: QpdConfig) -> QpdState:
    return QpdState(config=config, pool_a=config.initial_wealth, pool_b=0.0,
                    n=config.n0)


def rejection_rate(state: QpdState) -> float:
    """Empirical rejection rate; zero before the first test."""
    if state.tests_done == 0:
        return 0.0
    return state.rejections / state.tests_done


def allocation_for_cost(state: QpdState, c: int) -> float:
    """Level that buying c additional samples would fund right now."""
    if c < 0:
        raise ValueError("cost must be non-negative")
    cfg = state.config
    base = state.pool_a * (1.0 - cfg.q ** c)
    if cfg.variant == QpdVariant.ASR_OPT:
        base += min(rejection_rate(state) * cfg.alpha, state.pool_b)
    return base


def stability_bound(b: float, state: QpdState) -> float:
    """Cost ceiling for requests whose level-sample curve sits under b * q**n."""
    if b <= 0:
        raise ValueError("envelope coefficient b must be positive")
    cfg = state.config
    base = cfg.initial_wealth * cfg.q ** (-cfg.n0)
    return math.log(base / (b + base)) / math.log(cfg.q)


def quote(state: QpdState, request: TestRequest,
          envelope_b: Optional[float] = None) -> CostQuote:
    """Minimal sample cost whose funded level meets the request's power target.

    The linear scan from zero keeps minimality even for the two-pool variant,
    whose allocation is not guaranteed monotone in the cost.
    """
    cfg = state.config
    bound = None
    cap = cfg.max_cost
    if envelope_b is not None:
        bound = stability_bound(envelope_b, state)
        cap = min(cap, math.ceil(bound))
    for c in range(cap + 1):
        alloc = allocation_for_cost(state, c)
        if alloc <= 0.0:
            continue
        needed = dist.level_sample(request, state.n + c)
        if needed <= alloc:
            if cfg.variant == QpdVariant.ASR_OPT:
                # the reward pool is tapped only for the shortfall the decaying
                # pool leaves; granting its whole per-test cap as level would
                # inflate the realized type-I rate several-fold
                a_share = state.pool_a * (1.0 - cfg.q ** c)
                level = a_share + min(alloc - a_share,
                                      max(0.0, needed - a_share))
            else:
                level = alloc
            return CostQuote(cost=c, level=level, n_after=state.n + c,
                             stability_bound=bound)
    raise InfeasibleRequest(
        f"no cost up to {cap} funds the requested power (max_cost={cfg.max_cost})")


def _reward_rho(request: TestRequest, n_after: int, level: float) -> float:
    """Best power used for the reward cap: the declared effect size bounds the
    alternative unless the request says otherwise."""
    spec = request.spec
    if spec.alternative.kind == AlternativeKind.UNBOUNDED_ONE_SIDED:
        theta_max = spec.null_value + request.effect_size
        spec = replace(spec, alternative=Alternative.bounded_one_sided(theta_max))
    return dist.best_power(spec.with_n(n_after), level)


def execute(state: QpdState, request: TestRequest, p_value: float,
            precomputed: Optional[CostQuote] = None) -> Tuple[QpdState, QpdLedgerEntry]:
    """Atomically quote (unless supplied) and apply one test outcome."""
    if not 0.0 <= p_value <= 1.0:
        raise ValueError("p_value must be in [0, 1]")
    cfg = state.config
    cq = precomputed if precomputed is not None else quote(state, request)
    rejected = p_value <= cq.level
    n_after = cq.n_after

    if cfg.variant == QpdVariant.AS:
        # closed form keeps the decay invariant exact
        pool_a = cfg.initial_wealth * cfg.q ** (n_after - cfg.n0)
        pool_b = 0.0
    elif cfg.variant == QpdVariant.ASR:
        rho = _reward_rho(request, n_after, cq.level)
        reward = min(cq.level / rho + cfg.alpha / cfg.k,
                     1.0 - (1.0 - cfg.alpha) / cfg.k)
        pool_a = state.pool_a - cq.level + (reward if rejected else 0.0)
        pool_b = 0.0
    else:
        # only the level's shortfall beyond the decaying pool's share came
        # out of the reward pool; W(j) = W(j-1) - level + R*alpha still holds
        a_share = state.pool_a * (1.0 - cfg.q ** cq.cost)
        withdrawn = max(0.0, cq.level - a_share)
        pool_a = cfg.initial_wealth * cfg.q ** (n_after - cfg.n0)
        pool_b = max(0.0, state.pool_b - withdrawn) + (cfg.alpha if rejected else 0.0)

    entry = QpdLedgerEntry(request=request, quote=cq, rejected=rejected,
                           p_value=p_value, pool_a_after=pool_a,
                           pool_b_after=pool_b)
    new_state = QpdState(config=cfg, pool_a=pool_a, pool_b=pool_b, n=n_after,
                         tests_done=state.tests_done + 1,
                         rejections=state.rejections + (1 if rejected else 0),
                         ledger=state.ledger + (entry,))
    return new_state, entry


def power_guarantee_check(state: QpdState, request: TestRequest,
                          cq: CostQuote) -> bool:
    """True when the quoted level and sample count deliver the required power."""
    theta = request.spec.null_value + request.effect_size
    achieved = dist.power(request.spec.with_n(cq.n_after), cq.level, theta)
    return achieved >= request.required_power - 1e-9


def wealth_floor(state: QpdState) -> float:
    """Guaranteed wealth floor: initial wealth decayed by accumulated samples."""
    cfg = state.config
    return cfg.initial_wealth * cfg.q ** (state.n - cfg.n0)


def replay(config: QpdConfig, events) -> QpdState:
    """Rebuild a state from (request, p_value) pairs; pure and deterministic."""
    state = init_state(config)
    for request, p_value in events:
        state, _ = execute(state, request, p_value)
    return state
