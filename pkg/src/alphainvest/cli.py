"""Command-line entry point: simulations, trade-off curves, quotes, service.

Flags mirror config-file keys one-to-one; explicitly passed flags win over
the config file, which wins over built-in defaults. Outputs are pure
functions of flags + seed, so reruns are byte-identical.
"""
from __future__ import annotations

import json
import sys

import click
import numpy as np

from . import journal as jn
from . import procedures as proc
from . import qpd, sim, tradeoff
from .distributions import Alternative, Family, TestRequest, TestSpec

_SCHEMES = {
    "constant": proc.Scheme.CONSTANT,
    "relative": proc.Scheme.RELATIVE,
    "relative-200": proc.Scheme.RELATIVE_FIXED_M,
}


def _load_config(ctx, param, value):
    """Read a JSON config file into the context's default map."""
    if value is None:
        return None
    try:
        with open(value) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise click.UsageError(f"bad config file {value}: {exc}")
    if not isinstance(data, dict):
        raise click.UsageError(f"config file {value} must hold a JSON object")
    ctx.default_map = {**data, **(ctx.default_map or {})}
    return value


def _config_option():
    return click.option("--config", type=click.Path(exists=True),
                        callback=_load_config, is_eager=True,
                        expose_value=False,
                        help="JSON file of default flag values; flags win.")


def _emit(text: str, output: str | None) -> None:
    if output:
        with open(output, "w") as fh:
            fh.write(text)
    else:
        click.echo(text, nl=False)


@click.group()
def main():
    """Sequential-testing procedures and the quality-preserving database."""


@main.command("simulate-tables")
@_config_option()
@click.option("--scheme", type=click.Choice(sorted(_SCHEMES)), default="constant")
@click.option("--reps", type=int, default=10_000)
@click.option("--seed", type=int, default=0)
@click.option("--alpha", type=float, default=0.05)
@click.option("--p-false-null", type=float, default=0.1)
@click.option("--effect", type=float, default=2.0)
@click.option("--max-tests", type=int, default=20_000)
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="csv")
@click.option("--output", type=click.Path(), default=None)
def simulate_tables(scheme, reps, seed, alpha, p_false_null, effect,
                    max_tests, fmt, output):
    """Paired comparison of the five procedures on shared z-test streams."""
    try:
        stream = sim.StreamConfig(seed=seed, p_false_null=p_false_null,
                                  effect=effect, max_tests=max_tests)
        rule = proc.AllocationRule(scheme=_SCHEMES[scheme])
        configs = [
            proc.ProcedureConfig(kind=proc.ProcedureKind.ALPHA_SPENDING, alpha=alpha),
            proc.ProcedureConfig(kind=proc.ProcedureKind.ALPHA_INVESTING, alpha=alpha),
            proc.ProcedureConfig(kind=proc.ProcedureKind.ASR, alpha=alpha, k=1.0),
            proc.ProcedureConfig(kind=proc.ProcedureKind.ASR, alpha=alpha, k=1.1),
            proc.ProcedureConfig(kind=proc.ProcedureKind.ERO, alpha=alpha),
        ]
    except ValueError as exc:
        raise click.UsageError(str(exc))
    report = sim.run_table_experiment(reps, stream, rule, configs)
    text = sim.table_csv(report) if fmt == "csv" else sim.report_json(report) + "\n"
    _emit(text, output)


@main.command("simulate-qpd")
@_config_option()
@click.option("--reps", type=int, default=1000)
@click.option("--seed", type=int, default=0)
@click.option("--n-requests", type=int, default=100)
@click.option("--alpha", type=float, default=0.05)
@click.option("--eta", type=float, default=0.95)
@click.option("--q", type=float, default=0.999)
@click.option("--n0", type=int, default=2000)
@click.option("--p-false-null", type=float, default=0.1)
@click.option("--sigma", type=float, default=10.0)
@click.option("--effect", type=float, default=1.0)
@click.option("--power", type=float, default=0.9)
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="csv")
@click.option("--output", type=click.Path(), default=None)
def simulate_qpd(reps, seed, n_requests, alpha, eta, q, n0, p_false_null,
                 sigma, effect, power, fmt, output):
    """Paired comparison of database-manager variants on shared request streams."""
    try:
        configs = {
            "as": qpd.QpdConfig(variant=qpd.QpdVariant.AS, alpha=alpha, eta=eta,
                                q=q, n0=n0),
            "asr": qpd.QpdConfig(variant=qpd.QpdVariant.ASR, alpha=alpha, eta=eta,
                                 q=q, n0=n0),
            "asr_opt": qpd.QpdConfig(variant=qpd.QpdVariant.ASR_OPT, alpha=alpha,
                                     eta=eta, q=q, n0=n0),
        }
        request = TestRequest(
            spec=TestSpec(Family.Z_KNOWN_SIGMA, null_value=0.0,
                          alternative=Alternative.unbounded_one_sided(),
                          sigma=sigma),
            effect_size=effect, required_power=power)
    except ValueError as exc:
        raise click.UsageError(str(exc))
    report = sim.run_qpd_experiment(reps, configs, request,
                                    n_requests=n_requests,
                                    p_false_null=p_false_null, seed=seed)
    text = sim.qpd_cost_csv(report) if fmt == "csv" else sim.report_json(report) + "\n"
    _emit(text, output)


@main.command("tradeoff")
@_config_option()
@click.option("--family", type=click.Choice(["z", "t"]), default="z")
@click.option("--df", type=int, default=None, help="t family: degrees of freedom")
@click.option("--sigma", type=float, default=1.0, help="z family: known sigma")
@click.option("--alt", type=float, required=True,
              help="Upper bound of the one-sided alternative (standardized for t).")
@click.option("--alpha", type=float, default=0.05)
@click.option("--cost", type=float, default=0.1)
@click.option("--grid-size", type=int, default=200)
@click.option("--output", type=click.Path(), default=None)
def tradeoff_cmd(family, df, sigma, alt, alpha, cost, grid_size, output):
    """Reward-cap curve over test levels, with the knee solved exactly."""
    try:
        if family == "t":
            if df is None:
                raise click.UsageError("--df is required for the t family")
            spec = TestSpec(Family.T_ONE_SAMPLE, null_value=0.0,
                            alternative=Alternative.bounded_one_sided(alt),
                            n=df + 1)
        else:
            spec = TestSpec(Family.Z_KNOWN_SIGMA, null_value=0.0,
                            alternative=Alternative.bounded_one_sided(alt),
                            sigma=sigma, n=1)
        knee_level, knee_reward = tradeoff.ero_level(spec, cost, alpha)
        grid = np.geomspace(knee_level * 1e-3, min(1 - 1e-6, knee_level * 1e3),
                            grid_size)
        points = tradeoff.tradeoff_curve(spec, cost, alpha, grid)
    except (ValueError, tradeoff.SolverFailure) as exc:
        raise click.UsageError(str(exc))
    lines = ["level,reward,branch"]
    for p in points:
        lines.append(f"{p.level:.10g},{p.reward:.10g},{p.binding.value}")
    lines.append(f"{knee_level:.10g},{knee_reward:.10g},knee")
    _emit("\n".join(lines) + "\n", output)


@main.command("quote")
@_config_option()
@click.option("--journal", "journal_path", type=click.Path(exists=True),
              required=True, help="Instance journal to replay.")
@click.option("--sigma", type=float, default=1.0)
@click.option("--effect", type=float, required=True)
@click.option("--power", type=float, required=True)
def quote_cmd(journal_path, sigma, effect, power):
    """Replay a journal and print the cost/level quote for one request."""
    try:
        state = jn.replay(journal_path)
        request = TestRequest(
            spec=TestSpec(Family.Z_KNOWN_SIGMA, null_value=0.0,
                          alternative=Alternative.unbounded_one_sided(),
                          sigma=sigma),
            effect_size=effect, required_power=power)
        cq = qpd.quote(state, request)
    except (ValueError, jn.JournalCorrupt) as exc:
        raise click.UsageError(str(exc))
    except qpd.InfeasibleRequest as exc:
        click.echo(f"infeasible: {exc}", err=True)
        sys.exit(1)
    click.echo(json.dumps({"cost": cq.cost, "level": cq.level,
                           "n_after": cq.n_after}))


@main.command("serve")
@_config_option()
@click.option("--host", default="127.0.0.1")
@click.option("--port", type=int, default=8077)
@click.option("--data-dir", type=click.Path(), default=None,
              envvar="ALPHAINVEST_DATA_DIR")
def serve(host, port, data_dir):
    """Run the HTTP service."""
    from . import service

    service.main(host=host, port=port, data_dir=data_dir)


if __name__ == "__main__":
    main()
