"""Compare the compiled simulation kernel against the pure-Python twin.

Run:  python3 benchmarks/bench_kernels.py [--reps 200]
"""
from __future__ import annotations

import argparse
import time

import numpy as np
from scipy.special import ndtr

from alphainvest import _purekern, backend


def _streams(reps: int, n: int = 20_000, seed: int = 0):
    out = []
    for child in np.random.SeedSequence(seed).spawn(reps):
        rng = np.random.Generator(np.random.PCG64(child))
        theta = np.where(rng.random(n) < 0.1, 2.0, 0.0)
        p = ndtr(-rng.normal(theta, 1.0))
        out.append((p, theta))
    return out


def _run(kernel, streams, kind, scheme):
    t0 = time.perf_counter()
    totals = np.zeros(3)
    for p, theta in streams:
        totals += kernel.run_one(kind, scheme, 0.05, 0.95, 1.0, 0.05,
                                 0.1, 1e-3, 200, 2.0, p, theta)
    return time.perf_counter() - t0, totals


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--reps", type=int, default=200)
    args = ap.parse_args()

    try:
        from alphainvest import _fastkern
    except ImportError:
        print("compiled kernel not built; nothing to compare")
        return

    streams = _streams(args.reps)
    print(f"{args.reps} realizations, stream length 20000 "
          f"(active backend: {backend.BACKEND})\n")
    print(f"{'procedure/scheme':28s} {'compiled':>10s} {'pure':>10s} {'speedup':>8s}")
    cases = [
        ("alpha_spending/constant", _purekern.KIND_ALPHA_SPENDING, _purekern.SCHEME_CONSTANT),
        ("ero/constant", _purekern.KIND_ERO, _purekern.SCHEME_CONSTANT),
        ("ero/relative", _purekern.KIND_ERO, _purekern.SCHEME_RELATIVE),
        ("ero/relative-200", _purekern.KIND_ERO, _purekern.SCHEME_RELATIVE_FIXED_M),
    ]
    for name, kind, scheme in cases:
        t_fast, totals_fast = _run(_fastkern, streams, kind, scheme)
        t_pure, totals_pure = _run(_purekern, streams, kind, scheme)
        if not np.array_equal(totals_fast, totals_pure):
            print(f"  WARNING: result mismatch on {name}: "
                  f"{totals_fast} vs {totals_pure}")
        print(f"{name:28s} {t_fast:9.3f}s {t_pure:9.3f}s {t_pure / t_fast:7.1f}x")


if __name__ == "__main__":
    main()
