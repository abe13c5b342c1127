"""Evaluation quantities: coherent gain, spectral efficiency, codebook
sizing and the multi-user capacity model."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import btsm_codeword
from .physics import SPEED_OF_LIGHT, SystemConfig, doppler_frequency, inverse_sinc, sinc_norm


@dataclass(frozen=True)
class GainResult:
    G: float
    G_ref: float

    def __post_init__(self) -> None:
        if self.G < 0 or not self.G_ref > 0:
            raise ValueError("need G >= 0 and G_ref > 0")

    @property
    def rho(self) -> float:
        return self.G / self.G_ref

    @property
    def gain_db(self) -> float:
        """Gain relative to the reference, 20 log10(rho); -inf for rho = 0."""
        return 20.0 * math.log10(self.rho) if self.rho > 0 else -math.inf


def coherent_gain(h_series, w_series, conjugate: bool = False) -> float:
    """|mean_t p(t)| over per-sample products of N x n_t matrices.

    ``p(t) = sum_n h_n(t) w_n(t)`` (transmit convention). With
    ``conjugate=True`` the receive form ``h(t)^H w(t)`` is used instead.
    """
    h = np.asarray(h_series)
    w = np.asarray(w_series)
    if h.shape != w.shape:
        raise ValueError(f"shape mismatch: {h.shape} vs {w.shape}")
    if conjugate:
        h = np.conj(h)
    p = (h * w).sum(axis=0)
    return float(np.abs(p.mean()))


def sinc_prediction(v, cfg: SystemConfig):
    """Static-beam correlation |sinc(f_D(v) T_int)|."""
    return np.abs(sinc_norm(doppler_frequency(v, cfg) * cfg.T_int))


def btsm_prediction(v, cfg: SystemConfig, B_cb: int = 16):
    """|sinc(residual Doppler * T_int)| after nearest-codeword compensation."""
    v = np.atleast_1d(np.asarray(v, dtype=float))
    cw = np.array([btsm_codeword(x, cfg.v_max, B_cb) for x in v])
    return np.abs(sinc_norm(doppler_frequency(v - cw, cfg) * cfg.T_int))


def btsm_floor(cfg: SystemConfig, B_cb: int = 16) -> float:
    """Worst-case BTSM correlation, residual error v_max / (2 B_cb)."""
    dv = cfg.v_max / (2.0 * B_cb)
    return float(abs(sinc_norm(doppler_frequency(dv, cfg) * cfg.T_int)))


def spectral_efficiency(rho, snr_linear: float):
    """log2(1 + SNR rho^2 / (1 + SNR (1 - rho^2))) [bps/Hz].

    ``rho`` slightly above 1 (a noise artefact) is accepted and clipped to 1
    for the leakage term only.
    """
    rho = np.asarray(rho, dtype=float)
    if np.any(rho < 0):
        raise ValueError("rho must be non-negative")
    leak = np.clip(1.0 - rho**2, 0.0, None)
    out = np.log2(1.0 + snr_linear * rho**2 / (1.0 + snr_linear * leak))
    return float(out) if out.ndim == 0 else out


def btsm_codebook_size(
    rho_min: float,
    f_c: float = 140e9,
    v_max: float = 200.0,
    T_int: float = 0.5e-3,
    c: float = SPEED_OF_LIGHT,
) -> int:
    """Smallest codebook keeping the worst-case correlation above ``rho_min``."""
    if not 0.0 < rho_min < 1.0:
        raise ValueError(f"rho_min must lie in (0, 1), got {rho_min}")
    return math.ceil(f_c * v_max * T_int / (c * inverse_sinc(rho_min)))


# -- multi-user capacity --------------------------------------------------------

_KMAX_DIMS = {"FSM": "ABC", "TTD": "AB", "LDMA": "A", "BTSM": "AB", "OTFS_STYLE": "C"}


@dataclass(frozen=True)
class CapacityModel:
    A: int
    B: int
    C: int
    snr_linear: float
    scheme: str = "FSM"

    def __post_init__(self) -> None:
        if min(self.A, self.B, self.C) < 1:
            raise ValueError("cardinalities must be >= 1")
        if self.scheme not in _KMAX_DIMS:
            raise ValueError(f"unknown scheme {self.scheme!r}")

    @property
    def K_max(self) -> int:
        dims = {"A": self.A, "B": self.B, "C": self.C}
        return math.prod(dims[c] for c in _KMAX_DIMS[self.scheme])


def sinr_multiuser(K, model: CapacityModel):
    """Per-user SINR with K users sharing K_max orthogonal manifold points."""
    K = np.asarray(K, dtype=float)
    if np.any(K < 1):
        raise ValueError("K must be >= 1")
    snr = model.snr_linear
    base = snr / K
    over = np.clip(K / model.K_max - 1.0, 0.0, None)
    out = base / (1.0 + snr * over**2)
    return float(out) if out.ndim == 0 else out


def sum_rate(K, model: CapacityModel):
    K_arr = np.asarray(K, dtype=float)
    out = K_arr * np.log2(1.0 + sinr_multiuser(K_arr, model))
    return float(out) if np.ndim(out) == 0 else out


def peak_sum_rate(A: int, B: int, C: int, snr_linear: float) -> float:
    """Sum rate with every one of the A B C orthogonal points occupied."""
    if min(A, B, C) < 1:
        raise ValueError("cardinalities must be >= 1")
    K = A * B * C
    return K * math.log2(1.0 + snr_linear / K)
