"""System configuration, derived aperture geometry and sinc helpers.

All quantities are SI doubles. ``SystemConfig`` defaults reproduce the
140 GHz / 4096-element reference link (30 m range, 200 m/s users,
0.5 ms coherent window).
"""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

import numpy as np

SPEED_OF_LIGHT = 299_792_458.0


class ConfigError(ValueError):
    """Raised when a configuration violates one of its invariants."""


def _is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class SystemConfig:
    f_c: float = 140e9  # carrier [Hz]
    N: int = 4096  # element count
    d_over_lambda: float = 0.5
    z0: float = 30.0  # reference range [m]
    v_max: float = 200.0  # [m/s]
    T_int: float = 0.5e-3  # coherent integration window [s]
    snr_db: float = 20.0
    omega: float = 2 * math.pi * 10e3  # STM angular frequency [rad/s]
    sigma_phi: float = 0.02  # phase-noise std [rad]
    alpha_atm: float = 12.0  # [dB/km]
    c_light: float = SPEED_OF_LIGHT
    n_mc: int = 64
    n_t: int = 4096
    seed: int = 2024
    # "center": xi spans [-D/2, D/2]; "edge": xi_n = n*d
    aperture_origin: str = "center"

    def __post_init__(self) -> None:
        checks = [
            (self.f_c > 0, "f_c > 0"),
            (isinstance(self.N, (int, np.integer)) and self.N >= 2, "N >= 2"),
            (_is_power_of_two(int(self.N)), "N is a power of two"),
            (self.d_over_lambda > 0, "d_over_lambda > 0"),
            (self.z0 > 0, "z0 > 0"),
            (self.v_max >= 0, "v_max >= 0"),
            (self.T_int > 0, "T_int > 0"),
            (self.n_t >= 2, "n_t >= 2"),
            (self.sigma_phi >= 0, "sigma_phi >= 0"),
            (self.alpha_atm >= 0, "alpha_atm >= 0"),
            (self.c_light > 0, "c_light > 0"),
            (self.n_mc >= 1, "n_mc >= 1"),
            (self.aperture_origin in ("center", "edge"), "aperture_origin in {center, edge}"),
        ]
        for ok, name in checks:
            if not ok:
                raise ConfigError(f"invalid SystemConfig: requires {name}")

    @property
    def snr_linear(self) -> float:
        return 10.0 ** (self.snr_db / 10.0)

    def replace(self, **changes: Any) -> "SystemConfig":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict[str, Any]:
        return dataclasses.asdict(self)


_FIELD_TYPES = {f.name: f.type for f in dataclasses.fields(SystemConfig)}


def config_from_dict(values: Mapping[str, Any], base: SystemConfig | None = None) -> SystemConfig:
    """Apply ``values`` on top of ``base`` (reference defaults if omitted).

    Keys must be ``SystemConfig`` field names; ints are accepted for float
    fields but not the other way round.
    """
    base = base or SystemConfig()
    updates: dict[str, Any] = {}
    for key, value in values.items():
        if key not in _FIELD_TYPES:
            raise ConfigError(f"unknown configuration key {key!r}")
        kind = _FIELD_TYPES[key]
        if kind == "int":
            if isinstance(value, bool) or not isinstance(value, int):
                raise ConfigError(f"{key} must be an integer, got {value!r}")
        elif kind == "float":
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ConfigError(f"{key} must be a number, got {value!r}")
            value = float(value)
        elif kind == "str" and not isinstance(value, str):
            raise ConfigError(f"{key} must be a string, got {value!r}")
        updates[key] = value
    return base.replace(**updates)


def load_config_file(path: str | Path) -> dict[str, Any]:
    """Read a JSON config document; raises ``ConfigError`` on bad JSON."""
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError("config document must be a JSON object")
    return doc


@dataclass(frozen=True, eq=False)
class DerivedGeometry:
    cfg: SystemConfig
    lam: float
    d: float
    D: float
    k: float
    F: float
    dx_rayleigh: float
    dz_fresnel: float
    T_c: float
    w_spot: float
    xi: np.ndarray = field(repr=False)

    @property
    def N(self) -> int:
        return self.cfg.N

    @property
    def z0(self) -> float:
        return self.cfg.z0

    @property
    def fresnel_limit(self) -> float:
        """Outer edge of the radiative near field, 2 D^2 / lambda."""
        return 2.0 * self.D**2 / self.lam


def element_positions(N: int, d: float, origin: str = "center") -> np.ndarray:
    n = np.arange(N, dtype=float)
    if origin == "edge":
        return n * d
    return (n - (N - 1) / 2.0) * d


def derive_geometry(cfg: SystemConfig) -> DerivedGeometry:
    lam = cfg.c_light / cfg.f_c
    d = cfg.d_over_lambda * lam
    D = cfg.N * d
    xi = element_positions(cfg.N, d, cfg.aperture_origin)
    xi.setflags(write=False)
    return DerivedGeometry(
        cfg=cfg,
        lam=lam,
        d=d,
        D=D,
        k=2.0 * math.pi / lam,
        F=D**2 / (4.0 * lam * cfg.z0),
        dx_rayleigh=lam * cfg.z0 / D,
        dz_fresnel=2.0 * lam * cfg.z0**2 / D**2,
        T_c=lam / (2.0 * cfg.v_max) if cfg.v_max > 0 else math.inf,
        w_spot=2.44 * lam * cfg.z0 / D,
        xi=xi,
    )


def doppler_frequency(v, cfg: SystemConfig):
    """Two-way carrier Doppler 2 f_c v / c [Hz]; keeps the sign of ``v``."""
    if np.ndim(v):
        v = np.asarray(v, dtype=float)
    return 2.0 * cfg.f_c * v / cfg.c_light


def sinc_norm(x):
    """Normalized sinc, sin(pi x) / (pi x)."""
    return np.sinc(x)


def inverse_sinc(rho_min: float, tol: float = 1e-12) -> float:
    """Smallest x >= 0 with sinc_norm(x) == rho_min.

    sinc is strictly decreasing on [0, 1] from 1 to 0, so a bisection on
    that interval is unambiguous.
    """
    if not (0.0 < rho_min <= 1.0):
        raise ValueError(f"inverse_sinc domain is (0, 1], got {rho_min!r}")
    if rho_min == 1.0:
        return 0.0
    lo, hi = 0.0, 1.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if np.sinc(mid) > rho_min:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
