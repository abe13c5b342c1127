"""Compare the numba and numpy paths of the two hot kernels.

    python3 benchmarks/bench_kernels.py [--N 1024] [--n-t 1024]

Prints seconds per call of the Monte Carlo link kernel (five schemes) and
the direct O(N^2) Fresnel transform on each backend.
"""

import argparse

import numpy as np

from fsm4d import _kernels
from fsm4d.bench import _best_time, bench_kernels
from fsm4d.dfnt import DfntOperator
from fsm4d.physics import SystemConfig, derive_geometry


def main() -> None:
    p = argparse.ArgumentParser()
    p.add_argument("--N", type=int, default=1024)
    p.add_argument("--n-t", type=int, default=1024)
    p.add_argument("--repeats", type=int, default=3)
    args = p.parse_args()

    link = bench_kernels(args.N, args.n_t, args.repeats)
    geom = derive_geometry(SystemConfig(N=args.N))
    op = DfntOperator(geom, geom.z0)
    x = np.random.default_rng(0).standard_normal(args.N) + 0j
    direct = {}
    for flag in [False] + ([True] if _kernels._HAVE_NUMBA else []):
        op.direct_apply(x, use_numba=flag)
        direct["numba" if flag else "numpy"] = _best_time(lambda: op.direct_apply(x, use_numba=flag), args.repeats)

    print(f"N={args.N} n_t={args.n_t}")
    for name, table in (("link_products", link), ("direct_apply", direct)):
        row = "  ".join(f"{k}: {v * 1e3:9.2f} ms" for k, v in table.items())
        speedup = table["numpy"] / table["numba"] if "numba" in table else float("nan")
        print(f"{name:14s} {row}  speedup x{speedup:.1f}")


if __name__ == "__main__":
    main()
