"""Scenario runners. Each produces an ``ExperimentResult`` that is written
as one CSV plus a JSON metadata sidecar."""

from __future__ import annotations

import csv
import hashlib
import json
import math
from dataclasses import dataclass, field
from importlib import metadata
from pathlib import Path
from typing import Any, Callable

import numpy as np

from . import bench
from .channel import (
    Scheme,
    SchemeKind,
    TrajectoryUser,
    draw_trial,
    element_doppler,
    link_gains,
    nf_doppler_profile,
    reference_gain,
    time_grid,
)
from .detector import ser_monte_carlo
from .dfnt import beam_intensity_map, precode
from .manifold import Symbol4D, build_grid
from .metrics import (
    CapacityModel,
    btsm_prediction,
    peak_sum_rate,
    sinc_prediction,
    spectral_efficiency,
    sum_rate,
)
from .physics import ConfigError, SystemConfig, derive_geometry, doppler_frequency

N_SWEEP = 41
DESK_PRESET = {"N": 1024, "n_t": 1024, "n_mc": 16}
DEFAULT_SCHEMES = ("FSM", "BTSM", "TTD", "OTFS_STYLE", "LDMA")
GRID_DEFAULTS = {"A": 4, "B": 4, "C": 4, "qam_order": 16, "fov_deg": 30.0, "mode": "orthogonal"}


def velocity_sweep(cfg: SystemConfig, n: int = N_SWEEP) -> np.ndarray:
    return np.linspace(0.0, cfg.v_max, n)


def package_version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:  # pragma: no cover
        return "0+unknown"


@dataclass
class ExperimentSpec:
    name: str
    config: SystemConfig = field(default_factory=SystemConfig)
    schemes: tuple = DEFAULT_SCHEMES
    output_path: Path | None = None
    grid: dict = field(default_factory=dict)
    scheme_params: dict = field(default_factory=dict)  # B_cb, N_D
    options: dict = field(default_factory=dict)  # runner-specific knobs

    def __post_init__(self) -> None:
        self.name = self.name.replace("-", "_")
        if self.name not in RUNNERS:
            raise ConfigError(f"unknown experiment {self.name!r}; choose from {sorted(RUNNERS)}")
        for key in self.grid:
            if key not in GRID_DEFAULTS:
                raise ConfigError(f"unknown grid key {key!r}")
        for key in self.scheme_params:
            if key not in ("B_cb", "N_D"):
                raise ConfigError(f"unknown scheme parameter {key!r}")
        try:
            self.schemes = tuple(SchemeKind.parse(s).name for s in self.schemes)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def scheme_objects(self) -> list[Scheme]:
        return [Scheme(SchemeKind[name], **self.scheme_params) for name in self.schemes]

    def grid_params(self) -> dict:
        return {**GRID_DEFAULTS, **self.grid}

    def resolved(self) -> dict[str, Any]:
        return {
            "experiment": self.name,
            "config": self.config.to_dict(),
            "schemes": list(self.schemes),
            "grid": self.grid_params(),
            "scheme_params": {"B_cb": 16, "N_D": 32, **self.scheme_params},
            "options": {k: v for k, v in self.options.items() if not callable(v)},
        }


@dataclass
class ExperimentResult:
    name: str
    x_name: str
    x: np.ndarray
    curves: dict[str, np.ndarray]
    std: dict[str, np.ndarray] = field(default_factory=dict)
    index: dict[str, np.ndarray] = field(default_factory=dict)  # extra leading columns
    meta: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        n = len(self.x)
        for group in (self.curves, self.std, self.index):
            for key, arr in group.items():
                if len(arr) != n:
                    raise ValueError(f"column {key!r} has {len(arr)} rows, expected {n}")

    def columns(self) -> list[tuple[str, np.ndarray]]:
        cols = [(self.x_name, self.x), *self.index.items()]
        for key, arr in self.curves.items():
            cols.append((key, arr))
            if key in self.std:
                cols.append((f"{key}_std", self.std[key]))
        return cols

    def write(self, path: str | Path) -> tuple[Path, Path]:
        """Write ``path`` (CSV) and ``path.json``; output is byte-stable."""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        cols = self.columns()
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow([name for name, _ in cols])
            for i in range(len(self.x)):
                w.writerow([_fmt(arr[i]) for _, arr in cols])
        side = path.with_name(path.name + ".json")
        side.write_text(json.dumps(self.meta, indent=2, sort_keys=True, default=_jsonable) + "\n")
        return path, side


def _fmt(value) -> str:
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format(float(value), ".10g")


def _jsonable(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    raise TypeError(f"cannot serialise {type(obj)}")


def config_hash(resolved: dict) -> str:
    blob = json.dumps(resolved, sort_keys=True, default=_jsonable).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def _meta(spec: ExperimentSpec, **extra) -> dict:
    resolved = spec.resolved()
    return {
        "resolved": resolved,
        "seed": spec.config.seed,
        "config_hash": config_hash(resolved),
        "version": package_version(),
        **extra,
    }


# -- Monte Carlo core -----------------------------------------------------------


def simulate_rho(
    cfg: SystemConfig,
    velocities,
    schemes: list[Scheme],
    progress: Callable[[int, int], None] | None = None,
) -> tuple[np.ndarray, float]:
    """Normalised correlation samples, shape (n_mc, n_v, n_schemes), and G_ref.

    Trials are the outer loop so each trial's random draws are shared by
    every velocity and scheme.
    """
    geom = derive_geometry(cfg)
    time_grid(cfg)  # validates n_t
    g_ref = reference_gain(cfg, geom)
    velocities = np.asarray(velocities, dtype=float)
    rho = np.empty((cfg.n_mc, velocities.size, len(schemes)))
    for trial in range(cfg.n_mc):
        x0, noise = draw_trial(cfg, geom, trial)
        for iv, v in enumerate(velocities):
            user = TrajectoryUser(x0, float(v), cfg.z0)
            rho[trial, iv] = link_gains(schemes, user, cfg, geom, noise) / g_ref
        if progress:
            progress(trial + 1, cfg.n_mc)
    return rho, g_ref


def _per_scheme(spec, samples, transform=None):
    curves, std = {}, {}
    for k, name in enumerate(spec.schemes):
        vals = samples[:, :, k] if transform is None else transform(samples[:, :, k])
        curves[name] = vals.mean(axis=0)
        std[name] = vals.std(axis=0, ddof=1) if vals.shape[0] > 1 else np.zeros(vals.shape[1])
    return curves, std


def run_corr_sweep(spec: ExperimentSpec) -> ExperimentResult:
    cfg = spec.config
    v = velocity_sweep(cfg)
    rho, g_ref = simulate_rho(cfg, v, spec.scheme_objects(), spec.options.get("progress"))
    curves, std = _per_scheme(spec, rho)
    curves["sinc_analytic"] = sinc_prediction(v, cfg)
    return ExperimentResult(spec.name, "v_mps", v, curves, std, meta=_meta(spec, G_ref=g_ref))


def run_abs_gain(spec: ExperimentSpec) -> ExperimentResult:
    """Coherent gain in dB relative to G_ref."""
    cfg = spec.config
    v = velocity_sweep(cfg)
    rho, g_ref = simulate_rho(cfg, v, spec.scheme_objects(), spec.options.get("progress"))
    floor = 1e-12  # keeps log10 finite on exact nulls
    curves, std = _per_scheme(spec, rho, lambda r: 20.0 * np.log10(np.maximum(r, floor)))
    curves["sinc_analytic_db"] = 20.0 * np.log10(np.maximum(sinc_prediction(v, cfg), floor))
    return ExperimentResult(spec.name, "v_mps", v, curves, std, meta=_meta(spec, G_ref=g_ref, unit="dB re G_ref"))


def run_spec_eff(spec: ExperimentSpec) -> ExperimentResult:
    cfg = spec.config
    v = velocity_sweep(cfg)
    rho, g_ref = simulate_rho(cfg, v, spec.scheme_objects(), spec.options.get("progress"))
    snr = cfg.snr_linear
    curves, std = _per_scheme(spec, rho, lambda r: spectral_efficiency(r, snr))
    return ExperimentResult(spec.name, "v_mps", v, curves, std, meta=_meta(spec, G_ref=g_ref, unit="bps/Hz"))


def run_btsm_quant(spec: ExperimentSpec) -> ExperimentResult:
    """BTSM correlation on the sweep grid plus every codeword centre and edge."""
    cfg = spec.config
    B_cb = spec.scheme_params.get("B_cb", 16)
    step = cfg.v_max / B_cb
    v = np.unique(np.round(np.r_[velocity_sweep(cfg), (np.arange(B_cb) + 0.5) * step, np.arange(B_cb + 1) * step], 9))
    scheme = Scheme(SchemeKind.BTSM, **spec.scheme_params)
    rho, g_ref = simulate_rho(cfg, v, [scheme], spec.options.get("progress"))
    mean = rho[:, :, 0].mean(axis=0)
    sd = rho[:, :, 0].std(axis=0, ddof=1) if cfg.n_mc > 1 else np.zeros(v.size)
    curves = {"BTSM": mean, "btsm_analytic": btsm_prediction(v, cfg, B_cb)}
    return ExperimentResult(
        spec.name, "v_mps", v, curves, {"BTSM": sd}, meta=_meta(spec, G_ref=g_ref, B_cb=B_cb)
    )


def run_nf_spread(spec: ExperimentSpec) -> ExperimentResult:
    cfg = spec.config
    geom = derive_geometry(cfg)
    v = float(spec.options.get("velocity", cfg.v_max))
    dev = nf_doppler_profile(v, geom)
    curves = {"deviation_hz": dev, "element_doppler_hz": element_doppler(geom.xi, v, cfg)}
    meta = _meta(
        spec,
        velocity=v,
        scalar_doppler_hz=float(doppler_frequency(v, cfg)),
        centre_deviation_hz=float(np.interp(0.0, geom.xi, dev)),
        edge_deviation_hz=float(dev[-1]),
        edge_element_doppler_hz=float(curves["element_doppler_hz"][-1]),
    )
    return ExperimentResult(spec.name, "xi_m", geom.xi.copy(), curves, meta=meta)


def run_capacity(spec: ExperimentSpec) -> ExperimentResult:
    """Sum rate vs user count for LDMA/TTD/FSM, plus FSM for C in {1, 2, 4, 8}."""
    g = spec.grid_params()
    A, B, C = g["A"], g["B"], g["C"]
    snr = spec.config.snr_linear
    c_sweep = spec.options.get("c_sweep", (1, 2, 4, 8))
    k_top = 2 * max([A * B * C] + [A * B * c for c in c_sweep])
    K = np.arange(1, k_top + 1)
    curves, table = {}, {}
    for name in ("LDMA", "TTD", "FSM"):
        m = CapacityModel(A, B, C, snr, name)
        curves[name] = sum_rate(K, m)
        table[name] = {
            "K_max": m.K_max,
            "peak": float(sum_rate(m.K_max, m)),
            "K50": float(sum_rate(50, m)),
        }
    c_table = {}
    for c in c_sweep:
        m = CapacityModel(A, B, c, snr, "FSM")
        curves[f"FSM_C{c}"] = sum_rate(K, m)
        c_table[str(c)] = {"K_max": m.K_max, "peak": peak_sum_rate(A, B, c, snr)}
    return ExperimentResult(spec.name, "K", K, curves, meta=_meta(spec, table=table, c_sweep=c_table))


def run_dfnt_bench(spec: ExperimentSpec) -> ExperimentResult:
    sizes = spec.options.get("sizes", bench.DEFAULT_SIZES)
    res = bench.bench_scaling(
        sizes,
        repeats=spec.options.get("repeats", 5),
        flops_rate=spec.options.get("flops_rate", 1e13),
        cfg=spec.config,
    )
    curves = {"flops_model": res.flops_model, "t_dfnt_ns": res.t_dfnt_ns, "t_direct_ns": res.t_direct_ns}
    meta = _meta(spec, slope_dfnt=res.slope_dfnt, slope_direct=res.slope_direct, backend=res.backend)
    return ExperimentResult(spec.name, "N", np.asarray(res.sizes), curves, meta=meta)


def run_detect(spec: ExperimentSpec) -> ExperimentResult:
    cfg = spec.config
    geom = derive_geometry(cfg)
    grid = build_grid(geom, **spec.grid_params())
    snrs = np.asarray(spec.options.get("snr_db", [0.0, 5.0, 10.0, 15.0, 20.0]), dtype=float)
    n_symbols = int(spec.options.get("n_symbols", 10_000))
    ser = np.empty(snrs.size)
    ber = np.empty(snrs.size)
    for i, snr_db in enumerate(snrs):
        rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, i]))
        ser[i], ber[i] = ser_monte_carlo(grid, cfg.replace(snr_db=float(snr_db)), n_symbols, rng)
    meta = _meta(spec, n_symbols=n_symbols, bits_per_symbol=grid.bits_per_symbol, grid_points=grid.to_dict())
    return ExperimentResult(spec.name, "snr_db", snrs, {"ser": ser, "ber": ber}, meta=meta)


def run_beam_map(spec: ExperimentSpec) -> ExperimentResult:
    """Intensity maps for two velocities at one focus, long format (x, z)."""
    cfg = spec.config
    geom = derive_geometry(cfg)
    theta = math.radians(spec.options.get("theta_deg", 0.0))
    v1, v2 = spec.options.get("velocities", (50.0, 100.0))
    n = int(spec.options.get("n_grid", 101))
    xc = cfg.z0 * math.sin(theta)
    xs = xc + np.linspace(-5.0, 5.0, n) * geom.dx_rayleigh
    half_depth = min(5.0 * geom.dz_fresnel, 0.5 * cfg.z0)  # small apertures focus weakly
    zs = cfg.z0 + np.linspace(-1.0, 1.0, n) * half_depth
    maps = []
    for v in (v1, v2):
        w = precode(Symbol4D(theta, cfg.z0, float(v)), geom)
        maps.append(beam_intensity_map(w, xs, zs, geom))
    X, Z = np.meshgrid(xs, zs)
    diff = np.abs(maps[0] - maps[1])
    curves = {f"I_v{v1:g}": maps[0].ravel(), f"I_v{v2:g}": maps[1].ravel(), "abs_diff": diff.ravel()}
    meta = _meta(spec, theta_rad=theta, max_abs_diff=float(diff.max()))
    return ExperimentResult(spec.name, "x_m", X.ravel(), curves, index={"z_m": Z.ravel()}, meta=meta)


RUNNERS: dict[str, Callable[[ExperimentSpec], ExperimentResult]] = {
    "corr_sweep": run_corr_sweep,
    "abs_gain": run_abs_gain,
    "spec_eff": run_spec_eff,
    "nf_spread": run_nf_spread,
    "btsm_quant": run_btsm_quant,
    "capacity": run_capacity,
    "dfnt_bench": run_dfnt_bench,
    "detect": run_detect,
    "beam_map": run_beam_map,
}


def run(spec: ExperimentSpec) -> ExperimentResult:
    result = RUNNERS[spec.name](spec)
    if spec.output_path is not None:
        result.write(spec.output_path)
    return result
