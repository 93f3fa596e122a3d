"""Timing and agreement check for the compiled kernels vs their numpy
fallbacks.  Both variants are importable side by side, so this runs in one
process regardless of STYLFACTS_NO_NUMBA.

    python3 benchmarks/bench_kernels.py [--n 100000] [--repeat 5]
"""

import argparse
import math
import time

import numpy as np

from stylfacts import kernels


def best_of(fn, repeat):
    out = math.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        out = min(out, time.perf_counter() - t0)
    return out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=100_000)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--boot", type=int, default=200, help="bootstrap resamples")
    args = ap.parse_args()

    if not kernels._HAVE_NUMBA:
        print("numba is not importable; nothing to compare")
        return

    rng = np.random.default_rng(0)
    n = args.n
    eps2 = rng.standard_normal(n) ** 2 * 1e-4
    neg = (rng.standard_normal(n) < 0).astype(np.float64)
    z = rng.standard_normal(n)
    x = rng.standard_normal(n)
    a = np.abs(rng.standard_normal(n)) + 0.1
    b = np.abs(rng.standard_normal(n)) + 0.1
    block_len = math.ceil(n ** (1 / 3))
    starts = rng.integers(0, n, size=(args.boot, math.ceil(n / block_len)), dtype=np.int64)

    cases = [
        ("garch_filter", (kernels.garch_filter_np, kernels.garch_filter_nb),
         (eps2, 1e-6, 0.1, 0.85, 2e-4)),
        ("gjr_filter", (kernels.gjr_filter_np, kernels.gjr_filter_nb),
         (eps2, neg, 1e-6, 0.03, 0.1, 0.8, 2e-4)),
        ("garch_sim", (kernels.garch_sim_np, kernels.garch_sim_nb),
         (z, 1e-6, 0.1, 0.0, 0.85, 2e-4, 0)),
        ("ou_path", (kernels.ou_path_np, kernels.ou_path_nb),
         (z, 0.0, 0.0, math.exp(-0.05), 0.01)),
        ("rolling_var", (kernels.rolling_var_np, kernels.rolling_var_nb),
         (x, 21, 1)),
        ("rolling_mean", (kernels.rolling_mean_np, kernels.rolling_mean_nb),
         (x, 21, 1)),
        ("zumbach_boot", (kernels.zumbach_boot_np, kernels.zumbach_boot_nb),
         (a, b, starts, block_len, 10)),
    ]

    print(f"n={n}, best of {args.repeat}")
    print(f"{'kernel':<14} {'numpy':>10} {'numba':>10} {'speedup':>8}  agreement")
    for name, (f_np, f_nb), call_args in cases:
        r_np = f_np(*call_args)
        r_nb = f_nb(*call_args)  # also triggers compilation before timing
        r_np = r_np if isinstance(r_np, tuple) else (r_np,)
        r_nb = r_nb if isinstance(r_nb, tuple) else (r_nb,)
        err = max(float(np.max(np.abs(u - v))) if len(u) else 0.0
                  for u, v in zip(r_np, r_nb))
        t_np = best_of(lambda: f_np(*call_args), args.repeat)
        t_nb = best_of(lambda: f_nb(*call_args), args.repeat)
        print(f"{name:<14} {t_np * 1e3:>8.2f}ms {t_nb * 1e3:>8.2f}ms "
              f"{t_np / t_nb:>7.1f}x  max|diff|={err:.2e}")


if __name__ == "__main__":
    main()
