"""Monte-Carlo harness: paired-stream experiments over the wealth procedures
and the database-manager variants, with seeded determinism.

Realizations are independent; every procedure (or manager variant) inside one
experiment consumes the identical realization stream, so differences can be
assessed with paired statistics.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import special, stats

from . import backend, qpd
from .distributions import TestRequest
from .procedures import AllocationRule, ProcedureConfig, ProcedureKind, Scheme

_KIND_CODES = {
    ProcedureKind.ALPHA_SPENDING: backend.KIND_ALPHA_SPENDING,
    ProcedureKind.ALPHA_INVESTING: backend.KIND_ALPHA_INVESTING,
    ProcedureKind.ASR: backend.KIND_ASR,
    ProcedureKind.ERO: backend.KIND_ERO,
}
_SCHEME_CODES = {
    Scheme.CONSTANT: backend.SCHEME_CONSTANT,
    Scheme.RELATIVE: backend.SCHEME_RELATIVE,
    Scheme.RELATIVE_FIXED_M: backend.SCHEME_RELATIVE_FIXED_M,
}


@dataclass(frozen=True)
class StreamConfig:
    seed: int
    p_false_null: float = 0.1  # probability a stream entry carries the effect
    effect: float = 2.0
    max_tests: int = 20_000

    def __post_init__(self):
        if not 0.0 <= self.p_false_null <= 1.0:
            raise ValueError("p_false_null must be a probability")
        if self.max_tests < 1:
            raise ValueError("max_tests must be positive")


def gen_stream(config: StreamConfig) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """One deterministic stream of (theta, z, p) arrays for the given seed.

    Each entry is a single-sample z-test with unit variance; p-values are
    right-tailed.
    """
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(config.seed)))
    return _draw_stream(rng, config)


def _draw_stream(rng: np.random.Generator, config: StreamConfig):
    theta = np.where(rng.random(config.max_tests) < config.p_false_null,
                     config.effect, 0.0)
    z = rng.standard_normal(config.max_tests) + theta
    p = special.ndtr(-z)
    return theta, z, p


@dataclass(frozen=True)
class TTestResult:
    t: float
    p_value: float
    degenerate: bool = False


def paired_t_test(differences: Sequence[float]) -> TTestResult:
    """Two-sided one-sample t test of the differences against zero."""
    d = np.asarray(differences, dtype=float)
    if d.size < 2:
        raise ValueError("need at least two observations")
    sd = float(d.std(ddof=1))
    if sd == 0.0:
        return TTestResult(t=math.nan, p_value=math.nan, degenerate=True)
    t = float(d.mean()) / (sd / math.sqrt(d.size))
    p = 2.0 * float(stats.t.sf(abs(t), d.size - 1))
    return TTestResult(t=t, p_value=p)


@dataclass(frozen=True)
class ProcedureSummary:
    name: str
    mean_tests: float
    se_tests: float
    mean_true_rejects: float
    se_true_rejects: float
    mean_false_rejects: float
    se_false_rejects: float
    mfdr_hat: float


@dataclass(frozen=True)
class PairedComparison:
    reference: str
    other: str
    mean_diff_tests: float
    tests_t: float
    tests_p: float
    mean_diff_true_rejects: float
    true_rejects_t: float
    true_rejects_p: float
    dominance_fraction: float  # reference >= other in both tests and true rejects


@dataclass(frozen=True)
class SimReport:
    reps: int
    scheme: str
    stream: StreamConfig
    procedures: List[ProcedureSummary]
    paired: List[PairedComparison]
    per_rep_tests: Optional[Dict[str, np.ndarray]] = field(default=None, repr=False)
    per_rep_true: Optional[Dict[str, np.ndarray]] = field(default=None, repr=False)
    per_rep_false: Optional[Dict[str, np.ndarray]] = field(default=None, repr=False)


def default_name(config: ProcedureConfig) -> str:
    if config.kind == ProcedureKind.ASR:
        return f"asr_k{config.k:g}"
    return config.kind.value


def run_table_experiment(reps: int, stream: StreamConfig, rule: AllocationRule,
                         procedures: Sequence[ProcedureConfig],
                         names: Optional[Sequence[str]] = None,
                         keep_per_rep: bool = True) -> SimReport:
    """Paired Monte-Carlo comparison of wealth procedures on a z-test stream."""
    if reps < 1:
        raise ValueError("reps must be positive")
    names = list(names) if names is not None else [default_name(c) for c in procedures]
    if len(names) != len(procedures):
        raise ValueError("one name per procedure")

    n_proc = len(procedures)
    tests = np.zeros((n_proc, reps))
    true_rej = np.zeros((n_proc, reps))
    false_rej = np.zeros((n_proc, reps))
    scheme_code = _SCHEME_CODES[rule.scheme]
    children = np.random.SeedSequence(stream.seed).spawn(reps)

    for r in range(reps):
        rng = np.random.Generator(np.random.PCG64(children[r]))
        theta, _, p = _draw_stream(rng, stream)
        for i, cfg in enumerate(procedures):
            tests[i, r], true_rej[i, r], false_rej[i, r] = backend.run_one(
                _KIND_CODES[cfg.kind], scheme_code, cfg.alpha, cfg.eta, cfg.k,
                cfg.omega, rule.fraction, rule.stop_threshold, rule.fixed_m,
                stream.effect, p, theta)

    summaries = []
    for i, cfg in enumerate(procedures):
        rejects = true_rej[i] + false_rej[i]
        summaries.append(ProcedureSummary(
            name=names[i],
            mean_tests=float(tests[i].mean()),
            se_tests=float(tests[i].std(ddof=1) / math.sqrt(reps)) if reps > 1 else 0.0,
            mean_true_rejects=float(true_rej[i].mean()),
            se_true_rejects=float(true_rej[i].std(ddof=1) / math.sqrt(reps)) if reps > 1 else 0.0,
            mean_false_rejects=float(false_rej[i].mean()),
            se_false_rejects=float(false_rej[i].std(ddof=1) / math.sqrt(reps)) if reps > 1 else 0.0,
            mfdr_hat=float(false_rej[i].mean() / (rejects.mean() + cfg.eta)),
        ))

    paired = []
    ref_idx = next((i for i, c in enumerate(procedures) if c.kind == ProcedureKind.ERO), 0)
    for i in range(n_proc):
        if i == ref_idx:
            continue
        dt = tests[ref_idx] - tests[i]
        dtr = true_rej[ref_idx] - true_rej[i]
        tt = paired_t_test(dt) if reps > 1 else TTestResult(math.nan, math.nan, True)
        ttr = paired_t_test(dtr) if reps > 1 else TTestResult(math.nan, math.nan, True)
        dom = float(np.mean((tests[ref_idx] >= tests[i]) & (true_rej[ref_idx] >= true_rej[i])))
        paired.append(PairedComparison(
            reference=names[ref_idx], other=names[i],
            mean_diff_tests=float(dt.mean()), tests_t=tt.t, tests_p=tt.p_value,
            mean_diff_true_rejects=float(dtr.mean()),
            true_rejects_t=ttr.t, true_rejects_p=ttr.p_value,
            dominance_fraction=dom))

    return SimReport(
        reps=reps, scheme=rule.scheme.value, stream=stream,
        procedures=summaries, paired=paired,
        per_rep_tests={names[i]: tests[i] for i in range(n_proc)} if keep_per_rep else None,
        per_rep_true={names[i]: true_rej[i] for i in range(n_proc)} if keep_per_rep else None,
        per_rep_false={names[i]: false_rej[i] for i in range(n_proc)} if keep_per_rep else None,
    )


@dataclass(frozen=True)
class QpdVariantSummary:
    variant: str
    mean_cost_by_index: List[float]
    mean_true_rejections: float
    mean_type_i_errors: float
    ratio_mean_by_index: Optional[List[float]] = None  # vs the baseline variant
    ratio_median_by_index: Optional[List[float]] = None
    ratio_p2_5_by_index: Optional[List[float]] = None
    ratio_p97_5_by_index: Optional[List[float]] = None
    frac_zero_cost_from_index: Optional[List[float]] = None


@dataclass(frozen=True)
class QpdSimReport:
    reps: int
    n_requests: int
    seed: int
    p_false_null: float
    baseline: str
    variants: List[QpdVariantSummary]


def _coupled_p_value(u: float, level: float, is_effect: bool, power_target: float) -> float:
    """p-value consistent with a shared uniform draw.

    Under the null the p-value is the uniform itself. Under the alternative the
    test is run at its requested power, so rejection happens iff u <= power;
    the transform maps that event exactly onto p <= level.
    """
    if not is_effect:
        return u
    if u <= power_target:
        return u * level / power_target
    return level + (u - power_target) / (1.0 - power_target) * (1.0 - level)


def run_qpd_experiment(reps: int, configs: Dict[str, qpd.QpdConfig],
                       request: TestRequest, n_requests: int = 100,
                       p_false_null: float = 0.1, seed: int = 0,
                       baseline: str = "as") -> QpdSimReport:
    """Paired comparison of database-manager variants on identical request
    streams; per-realization truth and outcome draws are shared."""
    if baseline not in configs:
        raise ValueError(f"baseline {baseline!r} not among the variants")
    names = list(configs)
    costs = {v: np.zeros((reps, n_requests)) for v in names}
    true_rejections = {v: np.zeros(reps) for v in names}
    type_i = {v: np.zeros(reps) for v in names}
    children = np.random.SeedSequence(seed).spawn(reps)
    target = request.required_power

    for r in range(reps):
        rng = np.random.Generator(np.random.PCG64(children[r]))
        is_effect = rng.random(n_requests) < p_false_null
        u = rng.random(n_requests)
        for v in names:
            state = qpd.init_state(configs[v])
            for j in range(n_requests):
                cq = qpd.quote(state, request)
                p = _coupled_p_value(float(u[j]), cq.level, bool(is_effect[j]), target)
                state, entry = qpd.execute(state, request, p, precomputed=cq)
                costs[v][r, j] = cq.cost
                if entry.rejected:
                    if is_effect[j]:
                        true_rejections[v][r] += 1
                    else:
                        type_i[v][r] += 1

    base_costs = costs[baseline]
    summaries = []
    for v in names:
        ratio_stats = None
        if v != baseline:
            with np.errstate(divide="ignore", invalid="ignore"):
                ratios = np.where(base_costs > 0, costs[v] / np.where(base_costs > 0, base_costs, 1.0), np.nan)
            ratio_stats = {
                "mean": np.nanmean(ratios, axis=0),
                "median": np.nanmedian(ratios, axis=0),
                "p2_5": np.nanpercentile(ratios, 2.5, axis=0),
                "p97_5": np.nanpercentile(ratios, 97.5, axis=0),
            }
        suffix_zero = np.ones((reps, n_requests), dtype=bool)
        nonzero = costs[v] > 0
        # suffix scan: all-zero from index j onward
        acc = np.zeros(reps, dtype=bool)
        for j in range(n_requests - 1, -1, -1):
            acc = acc | nonzero[:, j]
            suffix_zero[:, j] = ~acc
        summaries.append(QpdVariantSummary(
            variant=v,
            mean_cost_by_index=[float(x) for x in costs[v].mean(axis=0)],
            mean_true_rejections=float(true_rejections[v].mean()),
            mean_type_i_errors=float(type_i[v].mean()),
            ratio_mean_by_index=[float(x) for x in ratio_stats["mean"]] if ratio_stats else None,
            ratio_median_by_index=[float(x) for x in ratio_stats["median"]] if ratio_stats else None,
            ratio_p2_5_by_index=[float(x) for x in ratio_stats["p2_5"]] if ratio_stats else None,
            ratio_p97_5_by_index=[float(x) for x in ratio_stats["p97_5"]] if ratio_stats else None,
            frac_zero_cost_from_index=[float(x) for x in suffix_zero.mean(axis=0)],
        ))

    return QpdSimReport(reps=reps, n_requests=n_requests, seed=seed,
                        p_false_null=p_false_null, baseline=baseline,
                        variants=summaries)


def table_csv(report: SimReport) -> str:
    """Procedure table rendering: one row per procedure."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["Procedure", "Tests", "True rejects", "False rejects", "mFDR"])
    for s in report.procedures:
        w.writerow([s.name, f"{s.mean_tests:.3f}", f"{s.mean_true_rejects:.3f}",
                    f"{s.mean_false_rejects:.3f}", f"{s.mfdr_hat:.3f}"])
    return buf.getvalue()


def qpd_cost_csv(report: QpdSimReport) -> str:
    """Mean cost curves: one row per variant per test index."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["variant", "test_index", "mean_cost"])
    for s in report.variants:
        for j, c in enumerate(s.mean_cost_by_index, start=1):
            w.writerow([s.variant, j, f"{c:.6f}"])
    return buf.getvalue()


def _to_jsonable(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, dict):
        return {k: _to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_to_jsonable(v) for v in obj]
    if isinstance(obj, float) and math.isnan(obj):
        return None
    return obj


def report_json(report) -> str:
    d = asdict(report)
    # per-rep arrays are working data, not part of the rendered report
    for key in ("per_rep_tests", "per_rep_true", "per_rep_false"):
        d.pop(key, None)
    return json.dumps(_to_jsonable(d), indent=2, sort_keys=True)


def emit_report(report, fmt: str, path: str) -> None:
    """Write a report to disk as CSV or JSON."""
    if fmt == "json":
        text = report_json(report)
    elif fmt == "csv":
        if isinstance(report, QpdSimReport):
            text = qpd_cost_csv(report)
        else:
            text = table_csv(report)
    else:
        raise ValueError(f"unknown format {fmt!r}")
    with open(path, "w") as fh:
        fh.write(text)
