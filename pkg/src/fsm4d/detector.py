"""Matched-filter detection over the 4D manifold grid, coarse-to-fine
acquisition, and symbol-error Monte Carlo.

Received model: ``y = h(s) d + n`` where ``h(s)`` is the unit-norm
manifold channel (the conjugate of ``precode(s)``) and ``d`` the QAM
point. Detection first picks the spatial-kinematic point maximising
``|h^H y|^2`` and then slices the complex projection ``h(s_hat)^H y``
against the constellation.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .manifold import ManifoldGrid, Symbol4D, channel_matrix, decode_symbol, encode_bits, gradient_for_velocity
from .physics import SystemConfig


@dataclass(frozen=True)
class DetectionResult:
    s_hat: Symbol4D
    metric: float
    qam_hat: int
    bits_hat: int


def filter_bank(grid: ManifoldGrid) -> np.ndarray:
    """(A B C) x N matrix of unit-norm channel rows, row-major in (i, j, l)."""
    th, z, v = grid.spatial_coordinates()
    return channel_matrix(th, z, v, grid.geom)


def _slice(proj: np.ndarray, qam: np.ndarray) -> np.ndarray:
    return np.argmin(np.abs(proj[:, None] - qam[None, :]), axis=1)


def detect_batch(Y: np.ndarray, grid: ManifoldGrid, bank: np.ndarray | None = None):
    """Detect every column of ``Y`` (N x n).

    Returns ``(spatial_index, qam_index, metric)`` arrays.
    """
    bank = filter_bank(grid) if bank is None else bank
    P = bank.conj() @ np.asarray(Y, dtype=np.complex128).reshape(bank.shape[1], -1)
    power = np.abs(P) ** 2
    idx = np.argmax(power, axis=0)
    cols = np.arange(P.shape[1])
    proj = P[idx, cols]
    return idx, _slice(proj, grid.qam), power[idx, cols]


def matched_filter_detect(y, grid: ManifoldGrid, geom=None, bank: np.ndarray | None = None) -> DetectionResult:
    """Single-vector ML detection; ``geom`` defaults to ``grid.geom``."""
    y = np.asarray(y, dtype=np.complex128)
    N = grid.geom.N
    if y.shape != (N,):
        raise ValueError(f"expected a length-{N} observation, got shape {y.shape}")
    idx, q, metric = detect_batch(y[:, None], grid, bank)
    i, rem = divmod(int(idx[0]), grid.B * grid.C)
    j, l = divmod(rem, grid.C)
    s_hat = grid.symbol(i, j, l, int(q[0]))
    return DetectionResult(s_hat, float(metric[0]), int(q[0]), decode_symbol(s_hat, grid))


# -- acquisition ---------------------------------------------------------------


def pilot_power(y) -> Callable[[np.ndarray], float]:
    """Ideal probe response |w^H y|^2 for a fixed pilot observation ``y``."""
    y = np.asarray(y, dtype=np.complex128)
    return lambda w: float(abs(np.vdot(w, y)) ** 2)


@dataclass(frozen=True)
class AcquisitionResult:
    theta: float
    z: float
    v: float
    indices: tuple[int, int, int]
    g: float | None  # initial ramp gradient Omega / v_hat; None when v_hat = 0
    n_coarse: int
    n_fine: int


def _blocks(n: int) -> list[range]:
    return [range(b, min(b + 2, n)) for b in range(0, n, 2)]


def acquire(response: Callable[[np.ndarray], float], grid: ManifoldGrid, omega: float | None = None) -> AcquisitionResult:
    """Coarse-to-fine search for the strongest manifold point.

    The coarse stage probes 2 x 2 x 2 blocks of the grid with the
    normalised sum of their steering vectors (at most |grid| / 8 probes
    for even cardinalities). The fine stage probes single points in the
    3^3 neighbourhood around the best block, clipped to the grid.
    """
    bank = filter_bank(grid)
    shape = (grid.A, grid.B, grid.C)
    omega = grid.geom.cfg.omega if omega is None else omega

    def row(i, j, l):
        return bank[grid.spatial_flat_index(i, j, l)]

    best, best_p, n_coarse = None, -math.inf, 0
    for bi, bj, bl in itertools.product(*(_blocks(n) for n in shape)):
        probe = sum(row(i, j, l) for i, j, l in itertools.product(bi, bj, bl))
        norm = np.linalg.norm(probe)
        if norm == 0:
            continue
        p = response(probe / norm)
        n_coarse += 1
        if not np.isfinite(p):
            raise ValueError("probe response must be finite")
        if p > best_p:
            best, best_p = (bi.start, bj.start, bl.start), p
    if best is None:
        raise ValueError("no usable probes; the grid is empty")

    centre = [min(b + 1, n - 1) for b, n in zip(best, shape)]
    hood = [range(max(c - 1, 0), min(c + 2, n)) for c, n in zip(centre, shape)]
    fine_best, fine_p, n_fine = None, -math.inf, 0
    for i, j, l in itertools.product(*hood):
        p = response(row(i, j, l))
        n_fine += 1
        if p > fine_p:
            fine_best, fine_p = (i, j, l), p

    i, j, l = fine_best
    v_hat = float(grid.velocities[l])
    g = gradient_for_velocity(v_hat, omega) if v_hat != 0 else None
    return AcquisitionResult(float(grid.thetas[i]), float(grid.depths[j]), v_hat, fine_best, g, n_coarse, n_fine)


# -- Monte Carlo ------------------------------------------------------------------


def noise_std(cfg: SystemConfig, N: int) -> float:
    """Per-element complex noise std so that ||n||^2 averages 1 / SNR."""
    return math.sqrt(1.0 / (N * cfg.snr_linear))


def ser_monte_carlo(
    grid: ManifoldGrid,
    cfg: SystemConfig,
    n_symbols: int,
    rng: np.random.Generator,
    noiseless: bool = False,
    batch: int = 1000,
) -> tuple[float, float]:
    """Symbol and bit error rates of the matched-filter detector at v = 0.

    Random M-bit words are mapped to manifold points; a symbol error is
    any wrong M-bit word, bit errors count differing bits.
    """
    if n_symbols < 1:
        raise ValueError("n_symbols must be >= 1")
    M = grid.bits_per_symbol
    N = grid.geom.N
    bank = filter_bank(grid)
    sigma = 0.0 if noiseless else noise_std(cfg, N)
    # lookup tables between words and (spatial index, qam index)
    words = np.arange(1 << M)
    syms = [encode_bits(int(w), grid) for w in words]
    sp_of = np.array([grid.spatial_flat_index(*grid.index_of(s)) for s in syms])
    q_of = np.array([s.qam_index for s in syms])
    word_of = np.empty((grid.n_spatial, grid.Q), dtype=np.int64)
    word_of[sp_of, q_of] = words

    n_sym_err = n_bit_err = 0
    done = 0
    while done < n_symbols:
        n = min(batch, n_symbols - done)
        tx = rng.integers(0, 1 << M, size=n)
        Y = bank[sp_of[tx]].T * grid.qam[q_of[tx]][None, :]
        if sigma > 0:
            Y = Y + sigma / math.sqrt(2.0) * (rng.standard_normal(Y.shape) + 1j * rng.standard_normal(Y.shape))
        idx, q, _ = detect_batch(Y, grid, bank)
        rx = word_of[idx, q]
        diff = rx ^ tx
        n_sym_err += int(np.count_nonzero(diff))
        n_bit_err += int(sum(int(x).bit_count() for x in diff[diff != 0]))
        done += n
    return n_sym_err / n_symbols, n_bit_err / (n_symbols * M)
