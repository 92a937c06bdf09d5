"""Monte-Carlo harness tests: seeded determinism, paired statistics, report
rendering, and small-scale sanity checks of the experiment outputs.
"""
import json
import math

import numpy as np
import pytest
from scipy import stats

from alphainvest import qpd, sim
from alphainvest.distributions import Alternative, Family, TestRequest, TestSpec
from alphainvest.procedures import AllocationRule, ProcedureConfig, ProcedureKind, Scheme
from alphainvest.qpd import QpdConfig, QpdVariant
from alphainvest.sim import StreamConfig


PROCS = [
    ProcedureConfig(kind=ProcedureKind.ALPHA_SPENDING, alpha=0.05),
    ProcedureConfig(kind=ProcedureKind.ALPHA_INVESTING, alpha=0.05),
    ProcedureConfig(kind=ProcedureKind.ERO, alpha=0.05),
]


class TestStream:
    def test_deterministic_per_seed(self):
        a = sim.gen_stream(StreamConfig(seed=42))
        b = sim.gen_stream(StreamConfig(seed=42))
        for x, y in zip(a, b):
            assert np.array_equal(x, y)
        c = sim.gen_stream(StreamConfig(seed=43))
        assert not np.array_equal(a[2], c[2])

    def test_p_values_uniform_under_null(self):
        theta, _, p = sim.gen_stream(StreamConfig(seed=1, p_false_null=0.0,
                                                  max_tests=50_000))
        assert np.all(theta == 0.0)
        ks = stats.kstest(p, "uniform")
        assert ks.pvalue > 1e-4

    def test_effect_rate(self):
        theta, _, _ = sim.gen_stream(StreamConfig(seed=2, p_false_null=0.1,
                                                  max_tests=100_000))
        assert np.mean(theta != 0.0) == pytest.approx(0.1, abs=0.005)


class TestPairedT:
    def test_known_value(self):
        d = [1.0, 2.0, 3.0, 4.0]
        res = sim.paired_t_test(d)
        ref = stats.ttest_1samp(d, 0.0)
        assert res.t == pytest.approx(ref.statistic, abs=1e-12)
        assert res.p_value == pytest.approx(ref.pvalue, abs=1e-12)

    def test_degenerate(self):
        res = sim.paired_t_test([2.0, 2.0, 2.0])
        assert res.degenerate

    def test_too_short(self):
        with pytest.raises(ValueError):
            sim.paired_t_test([1.0])


class TestTableExperiment:
    def test_seeded_reproducibility(self):
        rule = AllocationRule(Scheme.RELATIVE, fraction=0.1)
        r1 = sim.run_table_experiment(40, StreamConfig(seed=7), rule, PROCS)
        r2 = sim.run_table_experiment(40, StreamConfig(seed=7), rule, PROCS)
        for s1, s2 in zip(r1.procedures, r2.procedures):
            assert s1 == s2

    def test_spending_relative_runs_exactly_66(self):
        rule = AllocationRule(Scheme.RELATIVE, fraction=0.1)
        rep = sim.run_table_experiment(30, StreamConfig(seed=3), rule, PROCS)
        as_row = next(s for s in rep.procedures if s.name == "alpha_spending")
        assert as_row.mean_tests == pytest.approx(66.0, abs=1e-12)
        assert as_row.se_tests == 0.0

    def test_paired_reference_is_optimal_rule(self):
        rule = AllocationRule(Scheme.RELATIVE, fraction=0.1)
        rep = sim.run_table_experiment(25, StreamConfig(seed=5), rule, PROCS)
        assert all(c.reference == "ero" for c in rep.paired)
        assert len(rep.paired) == 2

    def test_fixed_m_scheme(self):
        rule = AllocationRule(Scheme.RELATIVE_FIXED_M, fraction=0.1, fixed_m=200)
        rep = sim.run_table_experiment(10, StreamConfig(seed=5), rule, PROCS)
        for s in rep.procedures:
            assert s.mean_tests == pytest.approx(200.0, abs=1e-12)

    def test_name_mismatch(self):
        rule = AllocationRule(Scheme.RELATIVE, fraction=0.1)
        with pytest.raises(ValueError):
            sim.run_table_experiment(2, StreamConfig(seed=1), rule, PROCS,
                                     names=["just_one"])


@pytest.fixture(scope="module")
def report():
    spec = TestSpec(Family.T_ONE_SAMPLE, null_value=0.0,
                    alternative=Alternative.unbounded_one_sided())
    request = TestRequest(spec=spec, effect_size=0.1, required_power=0.95)
    configs = {
        "as": QpdConfig(variant=QpdVariant.AS, alpha=0.05, q=0.999, n0=2000),
        "asr": QpdConfig(variant=QpdVariant.ASR, alpha=0.05, eta=0.95,
                         q=0.999, n0=2000),
        "asr_opt": QpdConfig(variant=QpdVariant.ASR_OPT, alpha=0.05,
                             eta=0.95, q=0.999, n0=2000),
    }
    return sim.run_qpd_experiment(40, configs, request, n_requests=60,
                                  p_false_null=0.1, seed=19)


class TestQpdExperiment:

    def test_shapes(self, report):
        assert {v.variant for v in report.variants} == {"as", "asr", "asr_opt"}
        for v in report.variants:
            assert len(v.mean_cost_by_index) == 60
            assert len(v.frac_zero_cost_from_index) == 60

    def test_baseline_has_no_ratios(self, report):
        base = next(v for v in report.variants if v.variant == "as")
        assert base.ratio_mean_by_index is None

    def test_as_costs_are_deterministic(self, report):
        # no rewards: the spending manager's cost sequence is a fixed
        # integer schedule shared by every realization
        base = next(v for v in report.variants if v.variant == "as")
        for c in base.mean_cost_by_index:
            assert c == pytest.approx(round(c), abs=1e-12)

    def test_rewards_cut_costs(self, report):
        base = next(v for v in report.variants if v.variant == "as")
        asr = next(v for v in report.variants if v.variant == "asr")
        assert sum(asr.mean_cost_by_index) < sum(base.mean_cost_by_index)

    def test_zero_cost_fraction_monotone(self, report):
        for v in report.variants:
            frac = v.frac_zero_cost_from_index
            assert all(a <= b + 1e-12 for a, b in zip(frac, frac[1:]))

    def test_bad_baseline(self):
        with pytest.raises(ValueError):
            sim.run_qpd_experiment(1, {}, None, baseline="nope")


class TestCoupledPValue:
    def test_null_is_identity(self):
        assert sim._coupled_p_value(0.37, 0.01, False, 0.95) == 0.37

    def test_effect_rejects_iff_u_below_power(self):
        level, power = 0.02, 0.95
        for u in (0.0, 0.5, 0.9499, 0.9501, 1.0):
            p = sim._coupled_p_value(u, level, True, power)
            assert (p <= level) == (u <= power)

    def test_monotone_in_u(self):
        us = np.linspace(0.0, 1.0, 101)
        ps = [sim._coupled_p_value(float(u), 0.02, True, 0.95) for u in us]
        assert all(a <= b + 1e-15 for a, b in zip(ps, ps[1:]))


class TestRendering:
    def test_table_csv(self):
        rule = AllocationRule(Scheme.RELATIVE, fraction=0.1)
        rep = sim.run_table_experiment(5, StreamConfig(seed=2), rule, PROCS)
        lines = sim.table_csv(rep).strip().split("\n")
        assert lines[0] == "Procedure,Tests,True rejects,False rejects,mFDR"
        assert len(lines) == 1 + len(PROCS)

    def test_report_json_round_trips(self):
        rule = AllocationRule(Scheme.RELATIVE, fraction=0.1)
        rep = sim.run_table_experiment(5, StreamConfig(seed=2), rule, PROCS)
        doc = json.loads(sim.report_json(rep))
        assert doc["reps"] == 5
        assert "per_rep_tests" not in doc

    def test_emit_report(self, tmp_path):
        rule = AllocationRule(Scheme.RELATIVE, fraction=0.1)
        rep = sim.run_table_experiment(3, StreamConfig(seed=2), rule, PROCS)
        out = tmp_path / "table.csv"
        sim.emit_report(rep, "csv", str(out))
        assert out.read_text().startswith("Procedure,")
        with pytest.raises(ValueError):
            sim.emit_report(rep, "yaml", str(out))
