"""Wall-clock scaling of the fast and direct transforms, and a numba vs
numpy comparison of the Monte Carlo link kernel."""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .channel import ALL_SCHEMES, Scheme, TrajectoryUser, link_products
from .dfnt import DfntOperator, flop_estimate
from .physics import SystemConfig, derive_geometry

DEFAULT_SIZES = (256, 512, 1024, 2048, 4096, 8192, 16384)


def _best_time(fn, repeats: int) -> float:
    """Minimum wall time over ``repeats`` calls [s]."""
    best = np.inf
    for _ in range(max(1, repeats)):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def loglog_slope(x, y) -> float:
    return float(np.polyfit(np.log(np.asarray(x, float)), np.log(np.asarray(y, float)), 1)[0])


@dataclass
class ScalingResult:
    sizes: list
    flops_model: np.ndarray
    t_dfnt_ns: np.ndarray
    t_direct_ns: np.ndarray
    slope_dfnt: float
    slope_direct: float
    backend: str


def bench_scaling(
    sizes=DEFAULT_SIZES,
    repeats: int = 5,
    flops_rate: float = 1e13,
    cfg: SystemConfig | None = None,
    use_numba: bool | None = None,
    seed: int = 0,
) -> ScalingResult:
    """Time ``apply`` and ``direct_apply`` for each aperture size.

    The direct path costs O(N^2) so it gets at most two repetitions above
    N = 4096.
    """
    cfg = cfg or SystemConfig()
    rng = np.random.default_rng(seed)
    sizes = [int(n) for n in sizes]
    t_fast, t_direct, flops = [], [], []
    for N in sizes:
        geom = derive_geometry(cfg.replace(N=N))
        op = DfntOperator(geom, cfg.z0)
        x = rng.standard_normal(N) + 1j * rng.standard_normal(N)
        op.direct_apply(x[:], use_numba=use_numba)  # warm-up / JIT
        t_fast.append(_best_time(lambda: op.apply(x), max(repeats, 20)))
        t_direct.append(_best_time(lambda: op.direct_apply(x, use_numba=use_numba), repeats if N <= 4096 else min(repeats, 2)))
        flops.append(flop_estimate("DFnT", N, flops_rate=flops_rate).flops)
    backend = "numba" if (_kernels.USE_NUMBA if use_numba is None else use_numba) else "numpy"
    return ScalingResult(
        sizes,
        np.array(flops),
        np.array(t_fast) * 1e9,
        np.array(t_direct) * 1e9,
        loglog_slope(sizes, t_fast),
        loglog_slope(sizes, t_direct),
        backend,
    )


def bench_kernels(N: int = 256, n_t: int = 1024, repeats: int = 3) -> dict[str, float]:
    """Seconds per ``link_products`` call on each backend (five schemes)."""
    cfg = SystemConfig(N=N, n_t=n_t, n_mc=1)
    geom = derive_geometry(cfg)
    user = TrajectoryUser(0.004, 150.0, cfg.z0)
    schemes = [Scheme(k) for k in ALL_SCHEMES]
    noise = np.random.default_rng(cfg.seed).normal(0.0, cfg.sigma_phi, (N, n_t))
    out = {}
    backends = [False] + ([True] if _kernels._HAVE_NUMBA else [])
    for flag in backends:
        link_products(schemes, user, cfg, geom, noise, use_numba=flag)  # warm-up
        out["numba" if flag else "numpy"] = _best_time(
            lambda: link_products(schemes, user, cfg, geom, noise, use_numba=flag), repeats
        )
    return out
