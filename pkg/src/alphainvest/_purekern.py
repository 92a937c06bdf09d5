"""Pure-Python twin of the compiled simulation kernel.

Drives the reference procedure state machines, so kernel-vs-reference
equality tests double as a cross-check of the compiled loop.
"""
from __future__ import annotations

import numpy as np

from . import procedures as proc
from .distributions import Alternative, Family, TestSpec

KIND_ALPHA_SPENDING = 0
KIND_ALPHA_INVESTING = 1
KIND_ASR = 2
KIND_ERO = 3
SCHEME_CONSTANT = 0
SCHEME_RELATIVE = 1
SCHEME_RELATIVE_FIXED_M = 2

_KINDS = {
    KIND_ALPHA_SPENDING: proc.ProcedureKind.ALPHA_SPENDING,
    KIND_ALPHA_INVESTING: proc.ProcedureKind.ALPHA_INVESTING,
    KIND_ASR: proc.ProcedureKind.ASR,
    KIND_ERO: proc.ProcedureKind.ERO,
}
_SCHEMES = {
    SCHEME_CONSTANT: proc.Scheme.CONSTANT,
    SCHEME_RELATIVE: proc.Scheme.RELATIVE,
    SCHEME_RELATIVE_FIXED_M: proc.Scheme.RELATIVE_FIXED_M,
}


def norm_cdf(x):
    from scipy.special import ndtr
    return float(ndtr(x))


def norm_quantile(p):
    if not 0.0 < p < 1.0:
        raise ValueError("p must be in (0, 1)")
    from scipy.special import ndtri
    return float(ndtri(p))


def ero_level_z(cost, shift, alpha):
    from . import tradeoff
    spec = TestSpec(Family.Z_KNOWN_SIGMA, null_value=0.0,
                    alternative=Alternative.simple(shift), sigma=1.0, n=1)
    return tradeoff.ero_level(spec, cost, alpha)


def run_one(kind, scheme, alpha, eta, k, omega, fraction, stop_threshold,
            fixed_m, shift, p_values, thetas):
    """Run one realization; same contract as the compiled run_one."""
    p_values = np.asarray(p_values)
    thetas = np.asarray(thetas)
    config = proc.ProcedureConfig(kind=_KINDS[kind], alpha=alpha, eta=eta,
                                  k=k, omega=omega)
    rule = proc.AllocationRule(scheme=_SCHEMES[scheme], fraction=fraction,
                               stop_threshold=stop_threshold, fixed_m=fixed_m)
    spec = TestSpec(Family.Z_KNOWN_SIGMA, null_value=0.0,
                    alternative=Alternative.simple(shift), sigma=1.0, n=1)
    state = proc.init(config)
    tests = true_rej = false_rej = 0
    for j in range(p_values.shape[0]):
        if proc.should_stop(state, rule):
            break
        allocation = proc.propose(state, rule, spec)
        state = proc.step(state, allocation, float(p_values[j]))
        tests += 1
        if state.history[-1].rejected:
            if thetas[j] != 0.0:
                true_rej += 1
            else:
                false_rej += 1
    else:
        if not proc.should_stop(state, rule):
            raise RuntimeError("stream exhausted before the stopping condition")
    return tests, true_rej, false_rej
