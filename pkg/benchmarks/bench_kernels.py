"""Compare the numba kernels against the pure-numpy fallbacks.

Runs three measurements:

* the pointwise nonlinear substep on 1-D and 2-D grids,
* the small-divisor scan (r=4, n_max=30),
* a full paper-fig2 style run (10^4 steps), once per backend in a fresh
  interpreter so that ``LOGSL_DISABLE_NUMBA`` takes effect at import.

Usage: python benchmarks/bench_kernels.py [--repeat N] [--skip-evolve]
"""
import argparse
import os
import subprocess
import sys
import time

import numpy as np

from logsl import _kernels
from logsl.resonance import multiset_table


def best_of(fn, repeat):
    fn()  # warm-up (and JIT compile)
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def bench_substep(repeat):
    rng = np.random.default_rng(1)
    rows = []
    for shape in [(128,), (1024,), (128, 128), (64, 64, 64)]:
        v = (1.0 + 0.3 * rng.standard_normal(shape)) * np.exp(1j * rng.uniform(-3, 3, shape))
        flat = v.reshape(-1)
        t_nb = best_of(lambda: _kernels.nonlinear_substep_numba(flat, 0.005, np.exp(-0.02), 0.005), repeat)
        t_np = best_of(lambda: _kernels.nonlinear_substep_numpy(flat, 0.005, np.exp(-0.02), 0.005), repeat)
        rows.append((f"substep {'x'.join(map(str, shape))}", t_nb, t_np))
    return rows


def bench_scan(repeat):
    _, sums, top3, off = multiset_table(0.5, 4, 30)
    t_nb = best_of(lambda: _kernels.divisor_scan_numba(sums, top3, off, 4, 30, 1e-13), repeat)
    t_np = best_of(lambda: _kernels.divisor_scan_numpy(sums, top3, off, 4, 30, 1e-13), max(1, repeat // 2))
    return [("divisor scan r=4 n_max=30", t_nb, t_np)]


EVOLVE_SNIPPET = """
import time
from logsl.experiments import paper_psi0
from logsl import GridSpec, ModelParams, SplitScheme, evolve
f = paper_psi0(GridSpec(1, 128))
evolve(f, ModelParams(0.5, 2.0), SplitScheme('LieTrotter', 0.01), 1.0)
t0 = time.perf_counter()
evolve(f, ModelParams(0.5, 2.0), SplitScheme('LieTrotter', 0.01), 100.0)
print(time.perf_counter() - t0)
"""


def bench_evolve():
    out = {}
    for label, flag in (("numba", "0"), ("numpy", "1")):
        env = dict(os.environ, LOGSL_DISABLE_NUMBA=flag)
        res = subprocess.run([sys.executable, "-c", EVOLVE_SNIPPET], env=env, capture_output=True,
                             text=True, check=True)
        out[label] = float(res.stdout.strip().splitlines()[-1])
    return [("evolve fig2, 1e4 steps", out["numba"], out["numpy"])]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=20)
    ap.add_argument("--skip-evolve", action="store_true")
    args = ap.parse_args()

    rows = bench_substep(args.repeat) + bench_scan(max(1, args.repeat // 4))
    if not args.skip_evolve:
        rows += bench_evolve()
    print(f"{'benchmark':<30} {'numba [s]':>12} {'numpy [s]':>12} {'speedup':>8}")
    for name, t_nb, t_np in rows:
        print(f"{name:<30} {t_nb:>12.3e} {t_np:>12.3e} {t_np / t_nb:>8.2f}")


if __name__ == "__main__":
    main()
