"""Discrete Fresnel transform: chirp -> unitary FFT -> chirp.

The forward operator at focal depth ``z`` is

    F_D x = Lam_out * FFT_ortho(Lam_in * x)

with ``Lam_in[n] = exp(+j k xi_n^2 / 2z)`` over the aperture and
``Lam_out[q] = exp(+j k x_q^2 / 2z)`` over the focal-plane samples
``x_q = f_q * N * d`` (``f_q`` the signed FFT bin, cycles/sample). Both
chirps tend to one as ``z -> inf`` so the operator degenerates to the
plain unitary FFT.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .manifold import Symbol4D, steering_vectors
from .physics import DerivedGeometry, SystemConfig, derive_geometry


@dataclass(frozen=True, eq=False)
class ChirpKernel:
    """Quadratic-phase vector exp(+j k xi^2 / 2z) on the aperture."""

    z: float
    values: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        if not np.allclose(np.abs(self.values), 1.0, atol=1e-12):
            raise ValueError("chirp kernel entries must have unit modulus")


def chirp_kernel(z: float, geom: DerivedGeometry) -> ChirpKernel:
    if not z > 0:
        raise ValueError(f"focal depth must be positive, got {z}")
    vals = np.exp(1j * geom.k * geom.xi**2 / (2.0 * z))
    vals.setflags(write=False)
    return ChirpKernel(float(z), vals)


def output_coordinates(geom: DerivedGeometry) -> np.ndarray:
    """Focal-plane sample positions paired with the FFT bins [m]."""
    N = geom.N
    return np.fft.fftfreq(N) * N * geom.d


class DfntOperator:
    """Precomputed three-stage transform for one focal depth.

    Read-only after construction, so one instance may be shared between
    threads.
    """

    def __init__(self, geom: DerivedGeometry, z: float):
        self.geom = geom
        self.z = float(z)
        self.lam_in = chirp_kernel(z, geom).values
        xq = output_coordinates(geom)
        self.lam_out = np.exp(1j * geom.k * xq**2 / (2.0 * z))
        self.lam_out.setflags(write=False)
        self._tw = None

    @property
    def N(self) -> int:
        return self.geom.N

    def _check(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.complex128)
        if x.shape != (self.N,):
            raise ValueError(f"expected a length-{self.N} vector, got shape {x.shape}")
        return x

    def apply(self, x) -> np.ndarray:
        x = self._check(x)
        return self.lam_out * np.fft.fft(self.lam_in * x, norm="ortho")

    def inverse(self, y) -> np.ndarray:
        y = self._check(y)
        return np.conj(self.lam_in) * np.fft.ifft(np.conj(self.lam_out) * y, norm="ortho")

    def direct_apply(self, x, use_numba: bool | None = None) -> np.ndarray:
        """Same result as ``apply`` by an explicit O(N^2) summation."""
        x = self._check(x)
        if self._tw is None:
            self._tw = np.exp(-2j * np.pi * np.arange(self.N) / self.N)
        u = self.lam_in * x / math.sqrt(self.N)
        return _kernels.direct_apply(u, self.lam_out, self._tw, use_numba=use_numba)

    def dense_matrix(self) -> np.ndarray:
        """Explicit N x N operator; meant for small N only."""
        if self.N > 4096:
            raise ValueError("dense_matrix is limited to N <= 4096")
        n = np.arange(self.N)
        W = np.exp(-2j * np.pi * np.outer(n, n) / self.N) / math.sqrt(self.N)
        return self.lam_out[:, None] * W * self.lam_in[None, :]


def dfnt_apply(x, z: float, geom: DerivedGeometry) -> np.ndarray:
    return DfntOperator(geom, z).apply(x)


def precode(s: Symbol4D, geom: DerivedGeometry) -> np.ndarray:
    """Unit-norm aperture weights focusing on manifold point ``s``.

    The depth chirp is applied to the conjugated angle-velocity steering
    vector p = conj(a * b); the focal-plane representation of the same
    beam is ``dfnt_apply(w, s.z, geom)``. The permutation stage is the
    identity.
    """
    a, _, b = steering_vectors(s, geom)
    w = chirp_kernel(s.z, geom).values * np.conj(a * b)
    return w / np.linalg.norm(w)


def point_channel(x, z: float, geom: DerivedGeometry, exact: bool = False) -> np.ndarray:
    """Static channel rows to lateral points ``x`` at range ``z``.

    Fresnel form by default (common phase dropped); ``exact=True`` uses
    the spherical distance.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))[:, None]
    xi = geom.xi[None, :]
    if exact:
        phase = -geom.k * np.sqrt(z**2 + (xi - x) ** 2)
    else:
        phase = -geom.k * (xi**2 - 2.0 * xi * x) / (2.0 * z)
    return np.exp(1j * phase) / math.sqrt(geom.N)


def beam_intensity_map(w, x_range, z_range, geom: DerivedGeometry, exact: bool = False) -> np.ndarray:
    """|h_point(x, z)^T w|^2 on the (z, x) grid, normalised to peak 1.

    Returns an array of shape ``(len(z_range), len(x_range))``.
    """
    w = np.asarray(w, dtype=np.complex128)
    xs = np.asarray(x_range, dtype=float)
    zs = np.asarray(z_range, dtype=float)
    if np.any(zs <= 0) or np.any(zs >= geom.fresnel_limit):
        raise ValueError("z_range must lie inside the radiative near field")
    out = np.empty((zs.size, xs.size))
    for iz, z in enumerate(zs):
        out[iz] = np.abs(point_channel(xs, z, geom, exact) @ w) ** 2
    peak = out.max()
    return out / peak if peak > 0 else out


# -- complexity model -------------------------------------------------------

METHODS = ("SVD", "MMSE_ZF", "MF", "OMP", "SOMP", "DFnT")


@dataclass(frozen=True)
class FlopEstimate:
    method: str
    N: int
    flops: float
    seconds: float
    ratio_vs_Tc: float


def flop_estimate(
    method: str,
    N: int,
    K: int = 10,
    flops_rate: float = 1e13,
    T_c: float | None = None,
) -> FlopEstimate:
    """Closed-form precoder cost and its latency relative to T_c.

    ``T_c`` defaults to the coherence time of the reference configuration.
    """
    key = {m.lower(): m for m in METHODS}.get(str(method).lower())
    if key is None:
        raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")
    if N < 2:
        raise ValueError("N must be >= 2")
    if key in ("OMP", "SOMP") and K < 1:
        raise ValueError("K must be >= 1 for greedy pursuits")
    if flops_rate <= 0:
        raise ValueError("flops_rate must be positive")
    N = int(N)
    flops = {
        "SVD": 4.0 / 3.0 * N**3,
        "MMSE_ZF": 4.0 / 3.0 * N**3,
        "MF": float(N) ** 2,
        "OMP": float(K) * N**2,
        "SOMP": float(K) ** 2 * N**2,
        "DFnT": 5.0 * N * math.log2(N) + 2.0 * N,
    }[key]
    if T_c is None:
        T_c = derive_geometry(SystemConfig()).T_c
    seconds = flops / flops_rate
    return FlopEstimate(key, N, flops, seconds, seconds / T_c)
