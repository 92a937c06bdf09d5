"""Database-manager tests: cost quoting, pool updates, fairness, stability,
and replay determinism. Quote minimality is cross-checked against an
exhaustive scan oracle.
"""
import math

import numpy as np
import pytest

from alphainvest import distributions as dist
from alphainvest import qpd
from alphainvest.distributions import Alternative, Family, TestRequest, TestSpec
from alphainvest.qpd import (CostQuote, InfeasibleRequest, QpdConfig,
                             QpdVariant)


Z_SPEC = TestSpec(Family.Z_KNOWN_SIGMA, null_value=0.0,
                  alternative=Alternative.unbounded_one_sided(), sigma=10.0)
Z_REQ = TestRequest(spec=Z_SPEC, effect_size=1.0, required_power=0.9)


def make_config(variant, **kw):
    defaults = dict(alpha=0.05, eta=None, q=0.999, n0=1)
    defaults.update(kw)
    return QpdConfig(variant=variant, **defaults)


class TestConfig:
    def test_validation(self):
        with pytest.raises(ValueError):
            make_config(QpdVariant.AS, alpha=0.0)
        with pytest.raises(ValueError):
            make_config(QpdVariant.AS, q=1.0)
        with pytest.raises(ValueError):
            make_config(QpdVariant.AS, n0=-1)
        with pytest.raises(ValueError):
            make_config(QpdVariant.ASR, k=0.5)

    def test_initial_wealth_by_variant(self):
        assert make_config(QpdVariant.AS).initial_wealth == pytest.approx(0.05)
        assert make_config(QpdVariant.ASR).initial_wealth == pytest.approx(
            0.05 * 0.95)
        assert make_config(QpdVariant.ASR, k=1.1).initial_wealth == pytest.approx(
            0.05 * 0.95 / 1.1)
        assert make_config(QpdVariant.ASR_OPT).initial_wealth == pytest.approx(
            0.05 * 0.95)


class TestAllocationForCost:
    def test_zero_cost_zero_allocation(self):
        st = qpd.init_state(make_config(QpdVariant.AS))
        assert qpd.allocation_for_cost(st, 0) == 0.0

    def test_worked_example(self):
        st = qpd.init_state(make_config(QpdVariant.AS))
        assert st.pool_a == pytest.approx(0.05)
        assert qpd.allocation_for_cost(st, 100) == pytest.approx(
            0.05 * (1.0 - 0.999 ** 100), abs=1e-15)
        assert qpd.allocation_for_cost(st, 100) == pytest.approx(0.004758, abs=5e-6)

    def test_two_pool_free_allocation_at_zero_cost(self):
        st = qpd.init_state(make_config(QpdVariant.ASR_OPT))
        st = qpd.QpdState(config=st.config, pool_a=st.pool_a, pool_b=0.04,
                          n=st.n, tests_done=4, rejections=2)
        # rejection rate 0.5; the reward pool funds level without new samples
        assert qpd.allocation_for_cost(st, 0) == pytest.approx(
            min(0.5 * 0.05, 0.04), abs=1e-15)

    def test_negative_cost(self):
        st = qpd.init_state(make_config(QpdVariant.AS))
        with pytest.raises(ValueError):
            qpd.allocation_for_cost(st, -1)


class TestQuote:
    def test_minimal_cost_matches_exhaustive_scan(self):
        st = qpd.init_state(make_config(QpdVariant.AS, n0=2000))
        cq = qpd.quote(st, Z_REQ)
        for c in range(cq.cost):
            alloc = qpd.allocation_for_cost(st, c)
            assert (alloc <= 0.0
                    or dist.level_sample(Z_REQ, st.n + c) > alloc)
        assert dist.level_sample(Z_REQ, cq.n_after) <= cq.level + 1e-15

    def test_zero_cost_when_already_funded(self):
        st = qpd.init_state(make_config(QpdVariant.ASR_OPT, n0=5000))
        st = qpd.QpdState(config=st.config, pool_a=st.pool_a, pool_b=0.05,
                          n=st.n, tests_done=2, rejections=2)
        easy = TestRequest(spec=Z_SPEC, effect_size=5.0, required_power=0.8)
        cq = qpd.quote(st, easy)
        assert cq.cost == 0

    def test_quote_passes_power_guarantee(self):
        st = qpd.init_state(make_config(QpdVariant.AS, n0=500))
        cq = qpd.quote(st, Z_REQ)
        assert qpd.power_guarantee_check(st, Z_REQ, cq)

    def test_infeasible_raises(self):
        st = qpd.init_state(make_config(QpdVariant.AS, max_cost=10))
        hard = TestRequest(spec=Z_SPEC, effect_size=0.01, required_power=0.99)
        with pytest.raises(InfeasibleRequest):
            qpd.quote(st, hard)

    def test_fairness_pointwise_easier_never_costs_more(self):
        rng = np.random.default_rng(5)
        st = qpd.init_state(make_config(QpdVariant.AS, n0=100))
        for _ in range(30):
            effect = float(rng.uniform(0.5, 2.0))
            power_hi = float(rng.uniform(0.85, 0.97))
            power_lo = power_hi - float(rng.uniform(0.05, 0.2))
            easy = TestRequest(spec=Z_SPEC, effect_size=effect * 1.2,
                               required_power=power_lo)
            hard = TestRequest(spec=Z_SPEC, effect_size=effect,
                               required_power=power_hi)
            # easy's level-sample curve sits strictly below hard's
            for n in (100, 500, 2000):
                assert dist.level_sample(easy, n) < dist.level_sample(hard, n)
            assert qpd.quote(st, easy).cost <= qpd.quote(st, hard).cost


class TestStabilityBound:
    def test_worked_example(self):
        cfg = QpdConfig(variant=QpdVariant.ASR, alpha=0.05, eta=1.0,
                        q=0.999, n0=0)
        st = qpd.init_state(cfg)
        assert qpd.stability_bound(1.0, st) == pytest.approx(3043.0, abs=0.1)
        assert qpd.stability_bound(1.0, st) == pytest.approx(
            math.log(0.05 / 1.05) / math.log(0.999), abs=1e-9)

    def test_positive_for_all_envelopes(self):
        st = qpd.init_state(make_config(QpdVariant.ASR))
        for b in (0.01, 0.5, 1.0, 10.0, 1e4):
            assert qpd.stability_bound(b, st) > 0.0

    def test_domain(self):
        st = qpd.init_state(make_config(QpdVariant.ASR))
        with pytest.raises(ValueError):
            qpd.stability_bound(0.0, st)

    def test_quotes_never_exceed_ceiling(self):
        # fit an envelope L(n) <= b * q^n for each request, then check the
        # quoted cost against the precomputed ceiling over random sequences
        rng = np.random.default_rng(9)
        cfg = make_config(QpdVariant.ASR, n0=1)
        for _ in range(100):
            st = qpd.init_state(cfg)
            for _ in range(3):
                effect = float(rng.uniform(0.8, 2.0))
                power = float(rng.uniform(0.8, 0.95))
                req = TestRequest(spec=Z_SPEC, effect_size=effect,
                                  required_power=power)
                ns = np.arange(st.n, st.n + 5000)
                b = float(np.max([dist.level_sample(req, int(n)) / cfg.q ** int(n)
                                  for n in ns[:: 250]]))
                ceiling = math.ceil(qpd.stability_bound(b, st))
                cq = qpd.quote(st, req)
                assert cq.cost <= ceiling
                st, _ = qpd.execute(st, req, float(rng.uniform()),
                                    precomputed=cq)


class TestExecute:
    def test_as_pool_decays_exactly(self):
        cfg = make_config(QpdVariant.AS, n0=1000)
        st = qpd.init_state(cfg)
        rng = np.random.default_rng(13)
        for _ in range(5):
            st, _ = qpd.execute(st, Z_REQ, float(rng.uniform()))
        assert st.pool_a == pytest.approx(
            cfg.initial_wealth * cfg.q ** (st.n - cfg.n0), abs=1e-18)
        assert st.pool_b == 0.0

    def test_asr_rejection_nets_alpha_minus_level(self):
        cfg = make_config(QpdVariant.ASR, n0=1000)
        st = qpd.init_state(cfg)
        cq = qpd.quote(st, Z_REQ)
        nxt, entry = qpd.execute(st, Z_REQ, 0.0, precomputed=cq)
        assert entry.rejected
        # at scale 1 the reward is exactly alpha
        assert nxt.pool_a == pytest.approx(st.pool_a - cq.level + 0.05,
                                           abs=1e-15)

    def test_asr_wealth_floor_invariant(self):
        cfg = make_config(QpdVariant.ASR, n0=1000)
        st = qpd.init_state(cfg)
        rng = np.random.default_rng(31)
        for _ in range(20):
            st, _ = qpd.execute(st, Z_REQ, float(rng.uniform()))
            assert st.pool_a >= qpd.wealth_floor(st) - 1e-12

    def test_asr_opt_pool_a_decays_exactly(self):
        cfg = make_config(QpdVariant.ASR_OPT, n0=1000)
        st = qpd.init_state(cfg)
        rng = np.random.default_rng(37)
        for _ in range(10):
            st, _ = qpd.execute(st, Z_REQ, float(rng.uniform()))
            assert st.pool_a == pytest.approx(
                cfg.initial_wealth * cfg.q ** (st.n - cfg.n0), abs=1e-18)
            assert st.pool_b >= 0.0

    def test_asr_opt_first_test_leaves_reward_pool_untouched(self):
        cfg = make_config(QpdVariant.ASR_OPT, n0=1000)
        st = qpd.init_state(cfg)
        assert qpd.rejection_rate(st) == 0.0
        nxt, entry = qpd.execute(st, Z_REQ, 0.5)
        assert not entry.rejected
        # B(0) = 0 and the empirical rate is 0: nothing withdrawn
        assert nxt.pool_b == 0.0

    def test_asr_opt_rejection_feeds_reward_pool(self):
        cfg = make_config(QpdVariant.ASR_OPT, n0=1000)
        st = qpd.init_state(cfg)
        nxt, entry = qpd.execute(st, Z_REQ, 0.0)
        assert entry.rejected
        assert nxt.pool_b == pytest.approx(0.05, abs=1e-15)

    def test_asr_opt_withdraws_only_the_shortfall(self):
        cfg = make_config(QpdVariant.ASR_OPT, n0=1000)
        st = qpd.init_state(cfg)
        # seed history: one rejection so the reward pool is live
        st, _ = qpd.execute(st, Z_REQ, 0.0)
        b_before = st.pool_b
        cq = qpd.quote(st, Z_REQ)
        a_share = st.pool_a * (1.0 - cfg.q ** cq.cost)
        needed = dist.level_sample(Z_REQ, cq.n_after)
        assert cq.level >= needed - 1e-15
        nxt, entry = qpd.execute(st, Z_REQ, 0.5, precomputed=cq)
        withdrawn = max(0.0, cq.level - a_share)
        assert nxt.pool_b == pytest.approx(b_before - withdrawn, abs=1e-15)

    def test_p_value_domain(self):
        st = qpd.init_state(make_config(QpdVariant.AS))
        with pytest.raises(ValueError):
            qpd.execute(st, Z_REQ, 1.5)


class TestPowerGuarantee:
    def test_narrative_example_passes_at_quoted_size(self):
        st = qpd.init_state(make_config(QpdVariant.AS, n0=1))
        cq = CostQuote(cost=862, level=0.049, n_after=863)
        assert qpd.power_guarantee_check(st, Z_REQ, cq)

    def test_narrative_example_fails_one_sample_short(self):
        st = qpd.init_state(make_config(QpdVariant.AS, n0=1))
        cq = CostQuote(cost=861, level=0.049, n_after=862)
        assert not qpd.power_guarantee_check(st, Z_REQ, cq)


class TestReplay:
    def test_replay_reproduces_final_state(self):
        cfg = make_config(QpdVariant.ASR_OPT, n0=1000)
        rng = np.random.default_rng(41)
        events = [(Z_REQ, float(p)) for p in rng.uniform(size=15)]
        st = qpd.init_state(cfg)
        for req, p in events:
            st, _ = qpd.execute(st, req, p)
        replayed = qpd.replay(cfg, events)
        assert replayed.pool_a == st.pool_a
        assert replayed.pool_b == st.pool_b
        assert replayed.n == st.n
        assert replayed.rejections == st.rejections
