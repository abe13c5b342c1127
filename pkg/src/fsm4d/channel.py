"""Time-varying near-field channels and per-scheme beamformer weights.

A user moves laterally, ``x_u(t) = x0 + v t``, at range ``z``. Channel
entries use the exact element-to-user distance plus an explicit carrier
Doppler rotation. Every scheme's weights belong to one family,

    w_n(t) = exp(j[k (chirp * xi_n^2 - 2 xi_n x_w(t) + x_w(t)^2) / (2 z_w)
                   + 2 pi f_w t]) / sqrt(N),

parameterised by ``(chirp, x_w, z_w, f_w)``; the hot loop in ``_kernels``
consumes that parameterisation directly so the N x n_t matrices never
need to exist during Monte Carlo runs.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .physics import ConfigError, DerivedGeometry, SystemConfig, doppler_frequency


@dataclass(frozen=True)
class TrajectoryUser:
    x0: float
    v: float
    z: float

    def __post_init__(self) -> None:
        if not self.z > 0:
            raise ValueError(f"user range must be positive, got {self.z}")

    def position(self, t) -> np.ndarray:
        return self.x0 + self.v * np.asarray(t, dtype=float)


def min_time_samples(cfg: SystemConfig) -> int:
    """At least 8 samples per Doppler cycle at v_max, and never fewer than 64."""
    cycles = math.ceil(float(doppler_frequency(cfg.v_max, cfg)) * cfg.T_int)
    return max(64, 8 * cycles)


def time_grid(cfg: SystemConfig) -> np.ndarray:
    """Midpoint samples of [-T/2, T/2], symmetric about t = 0."""
    need = min_time_samples(cfg)
    if cfg.n_t < need:
        raise ConfigError(f"n_t={cfg.n_t} under-samples the Doppler window; need >= {need}")
    T = cfg.T_int
    return -T / 2.0 + (np.arange(cfg.n_t) + 0.5) * T / cfg.n_t


def atmospheric_amplitude(cfg: SystemConfig, r: float | None = None) -> float:
    r = cfg.z0 if r is None else r
    return 10.0 ** (-cfg.alpha_atm * r / 1000.0 / 20.0)


@dataclass(frozen=True, eq=False)
class ChannelSeries:
    """Column ``H[:, i]`` is the aperture channel at time ``t[i]``."""

    H: np.ndarray
    t: np.ndarray

    @property
    def shape(self) -> tuple[int, int]:
        return self.H.shape


def draw_trial(cfg: SystemConfig, geom: DerivedGeometry, trial: int, n_t: int | None = None):
    """Per-trial random draws ``(x0, phase_noise)``.

    The stream is seeded by ``(cfg.seed, trial)`` only, so velocities and
    schemes evaluated in the same trial see common random numbers.
    """
    rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, trial]))
    x0 = rng.uniform(-geom.w_spot / 2.0, geom.w_spot / 2.0)
    n_t = cfg.n_t if n_t is None else n_t
    noise = rng.normal(0.0, cfg.sigma_phi, size=(geom.N, n_t)) if cfg.sigma_phi > 0 else None
    return float(x0), noise


def _channel_phase(user: TrajectoryUser, t, geom: DerivedGeometry) -> np.ndarray:
    cfg = geom.cfg
    xu = user.position(t)
    r = np.sqrt(user.z**2 + (geom.xi[:, None] - xu[None, :]) ** 2)
    f_d = float(doppler_frequency(user.v, cfg))
    return -geom.k * r - 2.0 * np.pi * f_d * t[None, :]


def simulate_channel(user: TrajectoryUser, cfg: SystemConfig, geom: DerivedGeometry, rng=None) -> ChannelSeries:
    """N x n_t channel for ``user``.

    ``rng`` supplies the phase noise; pass ``None`` (or set
    ``sigma_phi = 0``) for a noiseless channel, or an ``(N, n_t)`` array to
    reuse a precomputed draw.
    """
    t = time_grid(cfg)
    phase = _channel_phase(user, t, geom)
    if isinstance(rng, np.ndarray):
        phase = phase + rng
    elif rng is not None and cfg.sigma_phi > 0:
        phase = phase + rng.normal(0.0, cfg.sigma_phi, size=phase.shape)
    H = atmospheric_amplitude(cfg, user.z) / math.sqrt(geom.N) * np.exp(1j * phase)
    return ChannelSeries(H, t)


# -- schemes -----------------------------------------------------------------


class SchemeKind(enum.Enum):
    FSM = "fsm"
    BTSM = "btsm"
    TTD = "ttd"
    OTFS_STYLE = "otfs"
    LDMA = "ldma"

    @classmethod
    def parse(cls, name: str) -> "SchemeKind":
        key = name.strip().lower().replace("-", "_")
        aliases = {"otfs_style": "otfs", "4d_fsm": "fsm", "4dfsm": "fsm"}
        key = aliases.get(key, key)
        for kind in cls:
            if kind.value == key:
                return kind
        raise ValueError(f"unknown scheme {name!r}")


@dataclass(frozen=True)
class Scheme:
    kind: SchemeKind
    B_cb: int = 16  # BTSM velocity codebook size
    N_D: int = 32  # OTFS-style Doppler bins
    # TTD/LDMA: follow x_u(t) spatially (True) or hold the focus at x0
    spatial_tracking: bool = True

    def __post_init__(self) -> None:
        if not isinstance(self.kind, SchemeKind):
            raise ValueError(f"unknown scheme {self.kind!r}")
        if self.B_cb < 1 or self.N_D < 1:
            raise ValueError("B_cb and N_D must be >= 1")

    @property
    def name(self) -> str:
        return self.kind.name


ALL_SCHEMES = tuple(SchemeKind)


def btsm_codeword(v: float, v_max: float, B_cb: int) -> float:
    """Nearest half-offset codeword (i + 0.5) v_max / B_cb."""
    if v_max <= 0:
        return 0.0
    step = v_max / B_cb
    i = int(np.clip(math.floor(v / step), 0, B_cb - 1))
    return (i + 0.5) * step


def quantize_doppler(f_d: float, f_max: float, N_D: int) -> float:
    """Centre of the uniform bin over [0, f_max] containing ``f_d``."""
    if f_max <= 0:
        return 0.0
    width = f_max / N_D
    i = int(np.clip(math.floor(f_d / width), 0, N_D - 1))
    return (i + 0.5) * width


@dataclass(frozen=True, eq=False)
class WeightParams:
    chirp: bool
    x_w: np.ndarray  # focus lateral position per time sample [m]
    z_w: float
    f_w: float


def weight_params(scheme: Scheme, estimate: TrajectoryUser, t, cfg: SystemConfig) -> WeightParams:
    t = np.asarray(t, dtype=float)
    kind = scheme.kind
    if kind is SchemeKind.FSM:
        v_est = estimate.v
        return WeightParams(True, estimate.x0 + v_est * t, estimate.z, float(doppler_frequency(v_est, cfg)))
    if kind is SchemeKind.BTSM:
        v_est = btsm_codeword(estimate.v, cfg.v_max, scheme.B_cb)
        return WeightParams(True, estimate.x0 + v_est * t, estimate.z, float(doppler_frequency(v_est, cfg)))
    if kind in (SchemeKind.TTD, SchemeKind.LDMA):
        x_w = estimate.position(t) if scheme.spatial_tracking else np.full(t.shape, estimate.x0)
        return WeightParams(True, x_w, estimate.z, 0.0)
    if kind is SchemeKind.OTFS_STYLE:
        f_q = quantize_doppler(
            float(doppler_frequency(estimate.v, cfg)),
            float(doppler_frequency(cfg.v_max, cfg)),
            scheme.N_D,
        )
        return WeightParams(False, estimate.position(t), estimate.z, f_q)
    raise ValueError(f"unknown scheme {kind!r}")  # pragma: no cover


def weights_series(scheme: Scheme, estimate: TrajectoryUser, cfg: SystemConfig, geom: DerivedGeometry) -> np.ndarray:
    """N x n_t weight matrix; every column has unit norm."""
    t = time_grid(cfg)
    p = weight_params(scheme, estimate, t, cfg)
    xi = geom.xi[:, None]
    xw = p.x_w[None, :]
    quad = xi**2 if p.chirp else 0.0
    phase = geom.k * (quad - 2.0 * xi * xw + xw**2) / (2.0 * p.z_w) + 2.0 * np.pi * p.f_w * t[None, :]
    return np.exp(1j * phase) / math.sqrt(geom.N)


def link_products(
    schemes,
    user: TrajectoryUser,
    cfg: SystemConfig,
    geom: DerivedGeometry,
    noise: np.ndarray | None = None,
    estimate: TrajectoryUser | None = None,
    use_numba: bool | None = None,
) -> np.ndarray:
    """Per-sample transmit products sum_n h_n(t) w_n(t), shape (S, n_t).

    Equivalent to ``(simulate_channel(...).H * weights_series(...)).sum(0)``
    for each scheme, without building either matrix.
    """
    estimate = user if estimate is None else estimate
    t = time_grid(cfg)
    params = [weight_params(s, estimate, t, cfg) for s in schemes]
    return _kernels.link_products(
        geom.xi,
        t,
        user.position(t),
        user.z,
        geom.k,
        float(doppler_frequency(user.v, cfg)),
        atmospheric_amplitude(cfg, user.z),
        noise,
        np.array([p.chirp for p in params]),
        np.array([p.x_w for p in params]),
        np.array([p.z_w for p in params]),
        np.array([p.f_w for p in params]),
        use_numba=use_numba,
    )


def link_gains(schemes, user, cfg, geom, noise=None, estimate=None, use_numba=None) -> np.ndarray:
    """Coherent gains |mean_t p(t)| per scheme."""
    p = link_products(schemes, user, cfg, geom, noise, estimate, use_numba)
    return np.abs(p.mean(axis=1))


def reference_gain(cfg: SystemConfig, geom: DerivedGeometry) -> float:
    """FSM gain at v = 0, x0 = 0 without phase noise."""
    user = TrajectoryUser(0.0, 0.0, cfg.z0)
    return float(link_gains([Scheme(SchemeKind.FSM)], user, cfg, geom)[0])


# -- near-field Doppler spread -----------------------------------------------


def element_doppler(xi, v: float, cfg: SystemConfig, r0: float | None = None):
    """Per-element projected Doppler (2 f_c / c) v xi / sqrt(r0^2 + xi^2)."""
    r0 = cfg.z0 if r0 is None else r0
    xi = np.asarray(xi, dtype=float)
    return 2.0 * cfg.f_c / cfg.c_light * v * xi / np.sqrt(r0**2 + xi**2)


def nf_doppler_profile(v: float, geom: DerivedGeometry) -> np.ndarray:
    """Element Doppler minus the scalar carrier Doppler [Hz]."""
    cfg = geom.cfg
    return element_doppler(geom.xi, v, cfg) - float(doppler_frequency(v, cfg))
