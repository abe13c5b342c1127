"""The discrete angle x depth x velocity x QAM symbol manifold.

Steering-vector sign convention (used everywhere in the package):

    a(theta)_n = exp(+j k xi_n sin(theta))
    c(z)_n     = exp(-j k xi_n^2 / (2 z))
    b(v)_n     = exp(-j k xi_n v / c)
    h          = a * c * b / sqrt(N)

so that ``h(theta, z, 0)`` is the Fresnel expansion of the exact spherical
channel ``exp(-j k r_n)`` to the point ``(z sin(theta), z)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .physics import DerivedGeometry


@dataclass(frozen=True)
class Symbol4D:
    theta: float
    z: float
    v: float
    qam_index: int = 0
    qam_value: complex = 1.0 + 0.0j

    def __post_init__(self) -> None:
        if not abs(self.theta) < math.pi / 2:
            raise ValueError(f"|theta| must be < pi/2, got {self.theta}")
        if not self.z > 0:
            raise ValueError(f"depth must be positive, got {self.z}")
        if self.qam_index < 0:
            raise ValueError("qam_index must be non-negative")


# -- Gray coding ---------------------------------------------------------


def gray_encode(n: int) -> int:
    return n ^ (n >> 1)


def gray_decode(g: int) -> int:
    n = g
    shift = 1
    while (g >> shift) > 0:
        n ^= g >> shift
        shift += 1
    return n


def _log2_exact(n: int, name: str) -> int:
    if n < 1 or (n & (n - 1)):
        raise ValueError(f"{name} must be a power of two, got {n}")
    return n.bit_length() - 1


def qam_constellation(order: int) -> tuple[np.ndarray, int, int]:
    """Rectangular Gray-labelled QAM with unit average energy.

    Returns ``(points, bits_i, bits_q)``. Point ``qam_index = iI * nQ + iQ``
    where ``iI``/``iQ`` are the amplitude-level indices on each axis, so a
    unit step in either level index moves to a nearest neighbour. Order 2
    degenerates to BPSK, order 1 to a single point.
    """
    b = _log2_exact(order, "qam_order")
    bits_i = (b + 1) // 2
    bits_q = b // 2
    n_i, n_q = 1 << bits_i, 1 << bits_q
    lv_i = 2.0 * np.arange(n_i) - (n_i - 1)
    lv_q = 2.0 * np.arange(n_q) - (n_q - 1)
    pts = (lv_i[:, None] + 1j * lv_q[None, :]).ravel()
    energy = np.mean(np.abs(pts) ** 2)
    if energy > 0:
        pts = pts / math.sqrt(energy)
    else:
        pts = np.ones(1, dtype=complex)
    return pts, bits_i, bits_q


# -- grid ----------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ManifoldGrid:
    geom: DerivedGeometry
    thetas: np.ndarray
    depths: np.ndarray
    velocities: np.ndarray
    qam: np.ndarray
    qam_bits: tuple[int, int]
    mode: str = "orthogonal"

    @property
    def A(self) -> int:
        return len(self.thetas)

    @property
    def B(self) -> int:
        return len(self.depths)

    @property
    def C(self) -> int:
        return len(self.velocities)

    @property
    def Q(self) -> int:
        return len(self.qam)

    @property
    def field_widths(self) -> tuple[int, int, int, int]:
        return (
            _log2_exact(self.A, "A"),
            _log2_exact(self.B, "B"),
            _log2_exact(self.C, "C"),
            _log2_exact(self.Q, "qam_order"),
        )

    @property
    def bits_per_symbol(self) -> int:
        return sum(self.field_widths)

    @property
    def n_spatial(self) -> int:
        return self.A * self.B * self.C

    def symbol(self, i: int, j: int, l: int, m: int = 0) -> Symbol4D:
        return Symbol4D(
            float(self.thetas[i]),
            float(self.depths[j]),
            float(self.velocities[l]),
            int(m),
            complex(self.qam[m]),
        )

    def spatial_indices(self) -> Iterator[tuple[int, int, int]]:
        """(i, j, l) in row-major order, matching ``spatial_flat_index``."""
        for i in range(self.A):
            for j in range(self.B):
                for l in range(self.C):
                    yield i, j, l

    def spatial_flat_index(self, i: int, j: int, l: int) -> int:
        return (i * self.B + j) * self.C + l

    def spatial_coordinates(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Broadcast (theta, z, v) arrays over all A*B*C points, row-major."""
        th, z, v = np.meshgrid(self.thetas, self.depths, self.velocities, indexing="ij")
        return th.ravel(), z.ravel(), v.ravel()

    def index_of(self, s: Symbol4D) -> tuple[int, int, int]:
        return (
            int(np.argmin(np.abs(self.thetas - s.theta))),
            int(np.argmin(np.abs(self.depths - s.z))),
            int(np.argmin(np.abs(self.velocities - s.v))),
        )

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "A": self.A,
            "B": self.B,
            "C": self.C,
            "qam_order": self.Q,
            "bits_per_symbol": self.bits_per_symbol,
            "thetas_rad": self.thetas.tolist(),
            "depths_m": self.depths.tolist(),
            "velocities_mps": self.velocities.tolist(),
            "qam": [[p.real, p.imag] for p in self.qam],
        }


def build_grid(
    geom: DerivedGeometry,
    A: int = 4,
    B: int = 4,
    C: int = 4,
    qam_order: int = 16,
    mode: str = "orthogonal",
    fov_deg: float = 30.0,
) -> ManifoldGrid:
    """Build the product grid.

    Angles are uniform over ``+/-fov_deg``; depths step by the pure-depth
    null separation from ``z0``. Velocities are uniform on ``[0, v_max]``
    (``mode="uniform"``) or sit on successive pure-velocity null lines
    ``l * lambda c / (N d)`` (``mode="orthogonal"``).
    """
    for name, n in (("A", A), ("B", B), ("C", C), ("qam_order", qam_order)):
        _log2_exact(n, name)
    if A * B * C * qam_order < 2:
        raise ValueError("the manifold must carry at least one bit")
    if mode not in ("orthogonal", "uniform"):
        raise ValueError(f"unknown grid mode {mode!r}")
    if not 0 < fov_deg < 90:
        raise ValueError("fov_deg must lie in (0, 90)")

    thetas = np.deg2rad(np.linspace(-fov_deg, fov_deg, A)) if A > 1 else np.zeros(1)
    depths = geom.z0 + np.arange(B) * pure_depth_null(1, geom)
    if depths[0] <= 0 or depths[-1] >= geom.fresnel_limit:
        raise ValueError(
            f"depth grid [{depths[0]:.3f}, {depths[-1]:.3f}] m leaves the Fresnel region "
            f"(0, {geom.fresnel_limit:.1f}) m"
        )
    if mode == "orthogonal":
        velocities = np.arange(C) * pure_velocity_null(1, geom)
    else:
        velocities = np.linspace(0.0, geom.cfg.v_max, C) if C > 1 else np.zeros(1)
    qam, bi, bq = qam_constellation(qam_order)
    for arr in (thetas, depths, velocities, qam):
        arr.setflags(write=False)
    return ManifoldGrid(geom, thetas, depths, velocities, qam, (bi, bq), mode)


# -- bit mapping ---------------------------------------------------------


def _word_to_int(bits: int | Sequence[int], width: int) -> int:
    if isinstance(bits, (int, np.integer)):
        word = int(bits)
        if word < 0 or word >= (1 << width):
            raise ValueError(f"word {word} does not fit in {width} bits")
        return word
    bits = list(bits)
    if len(bits) != width:
        raise ValueError(f"expected a {width}-bit word, got {len(bits)} bits")
    word = 0
    for b in bits:
        if b not in (0, 1):
            raise ValueError("bits must be 0 or 1")
        word = (word << 1) | int(b)
    return word


def int_to_bits(word: int, width: int) -> list[int]:
    return [(word >> (width - 1 - i)) & 1 for i in range(width)]


def encode_bits(bits: int | Sequence[int], grid: ManifoldGrid) -> Symbol4D:
    """Map an M-bit word (int or MSB-first bit list) to a manifold point."""
    wa, wb, wc, wq = grid.field_widths
    word = _word_to_int(bits, wa + wb + wc + wq)
    fq = word & ((1 << wq) - 1)
    word >>= wq
    fc = word & ((1 << wc) - 1)
    word >>= wc
    fb = word & ((1 << wb) - 1)
    fa = word >> wb
    bi, bq = grid.qam_bits
    i_lvl = gray_decode(fq >> bq)
    q_lvl = gray_decode(fq & ((1 << bq) - 1))
    m = i_lvl * (1 << bq) + q_lvl
    return grid.symbol(gray_decode(fa), gray_decode(fb), gray_decode(fc), m)


def decode_symbol(s: Symbol4D, grid: ManifoldGrid) -> int:
    """Inverse of ``encode_bits``; returns the word as an int."""
    wa, wb, wc, wq = grid.field_widths
    i, j, l = grid.index_of(s)
    bi, bq = grid.qam_bits
    i_lvl, q_lvl = divmod(int(s.qam_index), 1 << bq)
    fq = (gray_encode(i_lvl) << bq) | gray_encode(q_lvl)
    word = gray_encode(i)
    word = (word << wb) | gray_encode(j)
    word = (word << wc) | gray_encode(l)
    return (word << wq) | fq


# -- steering / channel vectors -------------------------------------------


def steering_vectors(s: Symbol4D, geom: DerivedGeometry) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Unit-modulus factors ``(a, c, b)`` of the manifold channel."""
    xi, k = geom.xi, geom.k
    a = np.exp(1j * k * xi * math.sin(s.theta))
    c = np.exp(-1j * k * xi**2 / (2.0 * s.z))
    b = np.exp(-1j * k * xi * s.v / geom.cfg.c_light)
    return a, c, b


def channel_vector(s: Symbol4D, geom: DerivedGeometry) -> np.ndarray:
    a, c, b = steering_vectors(s, geom)
    return a * c * b / math.sqrt(geom.N)


def channel_matrix(thetas, depths, velocities, geom: DerivedGeometry) -> np.ndarray:
    """Rows are ``channel_vector`` for each (theta, z, v) triple."""
    th = np.asarray(thetas, dtype=float)[:, None]
    z = np.asarray(depths, dtype=float)[:, None]
    v = np.asarray(velocities, dtype=float)[:, None]
    xi = geom.xi[None, :]
    phase = geom.k * (xi * np.sin(th) - xi**2 / (2.0 * z) - xi * v / geom.cfg.c_light)
    return np.exp(1j * phase) / math.sqrt(geom.N)


def manifold_correlation(s_i: Symbol4D, s_j: Symbol4D, geom: DerivedGeometry) -> complex:
    """<h(s_i), h(s_j)>; exactly 1 when the symbols coincide."""
    return complex(np.vdot(channel_vector(s_i, geom), channel_vector(s_j, geom)))


def depth_correlation_profile(dz, geom: DerivedGeometry, z_ref: float | None = None) -> np.ndarray:
    """|<h(z_ref), h(z_ref + dz)>| for pure depth offsets (theta = v = 0)."""
    z_ref = geom.z0 if z_ref is None else z_ref
    dz = np.atleast_1d(np.asarray(dz, dtype=float))
    H = channel_matrix(np.zeros(dz.size + 1), np.r_[z_ref, z_ref + dz], np.zeros(dz.size + 1), geom)
    return np.abs(H[1:] @ H[0].conj())


# -- joint null surface -----------------------------------------------------


def kappa(dz, z0: float):
    """Linearised depth-mismatch curvature dz / (2 z0^2) [1/m]."""
    return dz / (2.0 * z0**2)


def kappa_exact(z_i: float, z_j: float) -> float:
    return 1.0 / (2.0 * z_i) - 1.0 / (2.0 * z_j)


def normalized_velocity(dv, geom: DerivedGeometry):
    return geom.k * dv / geom.cfg.c_light


def normalized_curvature(dz, geom: DerivedGeometry):
    return geom.k * kappa(dz, geom.z0)


def velocity_from_normalized(v_tilde, geom: DerivedGeometry):
    return v_tilde * geom.cfg.c_light / geom.k


def depth_from_curvature(z_tilde, geom: DerivedGeometry):
    return 2.0 * geom.z0**2 * z_tilde / geom.k


def null_surface_velocity(m: int, z_tilde, geom: DerivedGeometry):
    """Normalised velocity separation on the order-``m`` null line [rad/m]."""
    if m < 1:
        raise ValueError("null-line order m must be >= 1")
    N, d = geom.N, geom.d
    return 2.0 * m * math.pi / (N * d) - (N - 1) * d * np.asarray(z_tilde) / 2.0


def null_order(v_tilde, z_tilde, geom: DerivedGeometry):
    """Left-hand side of the null-surface condition divided by pi."""
    N, d = geom.N, geom.d
    return (v_tilde * N * d / 2.0 + z_tilde * N * (N - 1) * d**2 / 4.0) / math.pi


def pure_velocity_null(m: int, geom: DerivedGeometry) -> float:
    """m * lambda * c / (N d): the m-th velocity offset with zero correlation."""
    return m * geom.lam * geom.cfg.c_light / (geom.N * geom.d)


def pure_depth_null(m: int, geom: DerivedGeometry) -> float:
    N, d = geom.N, geom.d
    return 8.0 * m * math.pi * geom.z0**2 / (geom.k * N * (N - 1) * d**2)


# -- orthogonality metric ----------------------------------------------------


@dataclass(frozen=True)
class OrthWeights:
    alpha_theta: float
    alpha_z: float
    alpha_v: float
    alpha_d: float = 1.0

    def __post_init__(self) -> None:
        if min(self.alpha_theta, self.alpha_z, self.alpha_v, self.alpha_d) <= 0:
            raise ValueError("orthogonality weights must be positive")

    def scaled(self, factor: float) -> "OrthWeights":
        return OrthWeights(*(factor * a for a in (self.alpha_theta, self.alpha_z, self.alpha_v, self.alpha_d)))


def default_orth_weights(geom: DerivedGeometry) -> OrthWeights:
    """One resolution cell per dimension contributes a distance of about 1."""
    c = geom.cfg.c_light
    return OrthWeights(
        alpha_theta=(geom.D / geom.lam) ** 2,
        alpha_z=1.0 / geom.dz_fresnel**2,
        alpha_v=(geom.N * geom.d * geom.k / (2.0 * math.pi * c)) ** 2,
        alpha_d=1.0,
    )


def orthogonality_metric(s_i: Symbol4D, s_j: Symbol4D, w: OrthWeights) -> float:
    return (
        w.alpha_theta * (s_i.theta - s_j.theta) ** 2
        + w.alpha_z * (s_i.z - s_j.z) ** 2
        + w.alpha_v * (s_i.v - s_j.v) ** 2
        + w.alpha_d * abs(complex(s_i.qam_value) - complex(s_j.qam_value)) ** 2
    )


# -- space-time modulation ramp ----------------------------------------------


@dataclass(frozen=True)
class StmRamp:
    g: float  # spatial phase gradient [rad/m]
    omega: float  # temporal frequency [rad/s]
    v_syn: float  # synthetic velocity [m/s]

    @classmethod
    def from_velocity(cls, v_syn: float, omega: float) -> "StmRamp":
        return cls(gradient_for_velocity(v_syn, omega), omega, v_syn)


def gradient_for_velocity(v_syn: float, omega: float) -> float:
    if v_syn == 0:
        raise ZeroDivisionError("a zero synthetic velocity has no finite ramp gradient")
    return omega / v_syn


def stm_ramp_phase(ramp: StmRamp, xi, t):
    return ramp.omega * np.asarray(t) + ramp.g * np.asarray(xi)
