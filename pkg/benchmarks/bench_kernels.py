"""Timing comparison of the numba and numpy simplex backends.

Runs the storage and flexible-load models over a few representative sizes
and prints per-solve wall times for both backends plus the speedup.  The
first numba solve includes JIT compilation (or cache loading) and is
reported separately as warm-up.

Usage: python benchmarks/bench_kernels.py [--repeat 5] [--quick]
"""

import argparse
import time

import numpy as np

from flexarb.analysis import default_price_generator
from flexarb.flexibility import FlexParams, build_flex_lp
from flexarb.lp import available_backends, solve_lp
from flexarb.pricing import synthetic_day
from flexarb.storage import StorageParams, build_storage_lp


def _storage_case(n_steps: int, tight_tau: bool):
    params = StorageParams(b_min=0.2, b_max=1.0, b_0=0.2, delta_min=-0.5,
                           delta_max=0.5, eta_ch=0.95, eta_dis=0.95)
    if tight_tau:
        params = params.with_ramp_rate_fraction(0.1, 0.25)
    prices = synthetic_day(11, n_steps=n_steps)
    include_rr = tight_tau
    label = f"storage N={n_steps}" + (" tau=10%" if tight_tau else "")
    return label, build_storage_lp(params, prices,
                                   include_ramp_rate=include_rr)


def _flex_case(n_steps: int):
    t_a, t_d = n_steps // 4 + 1, 3 * n_steps // 4
    window = t_d - t_a + 1
    params = FlexParams(n_steps=n_steps, t_a=t_a, t_d=t_d,
                        K=window * 0.25 * 2.0, y_max=4.0)
    params = params.with_ramp_rate_fraction(0.1)
    prices = synthetic_day(12, n_steps=n_steps)
    return f"flex N={n_steps} xi=10%", build_flex_lp(params, prices)


def _time_solve(problem, backend: str, repeat: int) -> float:
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        sol = solve_lp(problem, backend=backend)
        dt = time.perf_counter() - t0
        if sol.status.value != "optimal":
            raise RuntimeError(f"benchmark solve ended {sol.status.value}")
        best = min(best, dt)
    return best


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5,
                    help="timed repetitions per case; best is reported")
    ap.add_argument("--quick", action="store_true",
                    help="smaller sizes, repeat=2")
    args = ap.parse_args()
    repeat = 2 if args.quick else args.repeat

    backends = available_backends()
    print(f"backends available: {', '.join(backends)}")

    cases = [
        _storage_case(24, False),
        _storage_case(96, False),
        _storage_case(96, True),
        _flex_case(96),
    ]
    if args.quick:
        cases = cases[:2]

    if "numba" in backends:
        t0 = time.perf_counter()
        solve_lp(cases[0][1], backend="numba")
        print(f"numba warm-up (compile/cache load): "
              f"{time.perf_counter() - t0:.2f} s\n")

    w = max(len(label) for label, _ in cases)
    header = f"{'case':<{w}}  " + "".join(f"{b + ' [ms]':>12}"
                                          for b in backends)
    if len(backends) == 2:
        header += f"{'speedup':>9}"
    print(header)
    for label, problem in cases:
        times = {b: _time_solve(problem, b, repeat) for b in backends}
        line = f"{label:<{w}}  " + "".join(f"{times[b] * 1e3:>12.2f}"
                                           for b in backends)
        if len(backends) == 2:
            line += f"{times['numpy'] / times['numba']:>8.1f}x"
        print(line)

    gen = default_price_generator()
    par = StorageParams(b_min=0.2, b_max=1.0, b_0=0.2, delta_min=-0.5,
                        delta_max=0.5, eta_ch=0.95, eta_dis=0.95)
    count = 20 if args.quick else 100
    for b in backends:
        t0 = time.perf_counter()
        for s in range(count):
            solve_lp(build_storage_lp(par, gen(s), include_ramp_rate=False),
                     backend=b)
        dt = time.perf_counter() - t0
        print(f"\n{count}-day batch, {b}: {dt:.2f} s "
              f"({dt / count * 1e3:.1f} ms/day)")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
