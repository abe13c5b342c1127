"""Hot inner loops, with numba and pure-numpy implementations.

``FSM4D_NUMBA=0`` in the environment (or a missing numba install) selects
the numpy path for the whole process. Both paths take identical inputs
and agree to floating-point rounding; the numpy versions materialise the
N x n_t matrices, the numba versions stream over them.
"""

from __future__ import annotations

import math
import os

import numpy as np

try:
    from numba import config as _nb_config
    from numba import njit, prange

    # an old system TBB only produces a warning before numba falls back
    _nb_config.THREADING_LAYER_PRIORITY = ["omp", "tbb", "workqueue"]
    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    _HAVE_NUMBA = False

USE_NUMBA = _HAVE_NUMBA and os.environ.get("FSM4D_NUMBA", "1").strip().lower() not in (
    "0",
    "false",
    "off",
    "no",
)


def backend() -> str:
    return "numba" if USE_NUMBA else "numpy"


# -- link products -------------------------------------------------------
#
# For every scheme s and time sample t:
#   p[s, t] = sum_n h_n(t) w_{s,n}(t)
#   h_n(t)  = amp / sqrt(N) * exp(j(-k r_n(t) - 2 pi f_d t + noise[n, t]))
#   r_n(t)  = sqrt(z^2 + (xi_n - x_user(t))^2)
#   w_{s,n} = 1 / sqrt(N) * exp(j(k (chirp_s xi_n^2 - 2 xi_n x_s(t) + x_s(t)^2) / (2 z_s)
#                                 + 2 pi f_s t))


def _link_products_numpy(xi, t, x_user, z_user, k, f_d, amp, noise, w_chirp, w_x, w_z, w_f):
    N = xi.size
    r = np.sqrt(z_user**2 + (xi[:, None] - x_user[None, :]) ** 2)
    ph_h = -k * r - 2.0 * np.pi * f_d * t[None, :]
    if noise.size:
        ph_h = ph_h + noise
    out = np.empty((len(w_z), t.size), dtype=np.complex128)
    for s in range(len(w_z)):
        xs = w_x[s][None, :]
        quad = xi[:, None] ** 2 if w_chirp[s] else 0.0
        ph_w = k * (quad - 2.0 * xi[:, None] * xs + xs**2) / (2.0 * w_z[s]) + 2.0 * np.pi * w_f[s] * t[None, :]
        out[s] = np.exp(1j * (ph_h + ph_w)).sum(axis=0)
    return out * (amp / N)


if _HAVE_NUMBA:

    @njit(parallel=True, cache=True, fastmath=False)
    def _link_products_numba(xi, t, x_user, z_user, k, f_d, amp, noise, w_chirp, w_x, w_z, w_f):
        N = xi.size
        n_t = t.size
        S = w_z.size
        has_noise = noise.size > 0
        out = np.empty((S, n_t), dtype=np.complex128)
        two_pi = 2.0 * math.pi
        for it in prange(n_t):
            tt = t[it]
            xu = x_user[it]
            acc_re = np.zeros(S)
            acc_im = np.zeros(S)
            for n in range(N):
                dx = xi[n] - xu
                ph_h = -k * math.sqrt(z_user * z_user + dx * dx) - two_pi * f_d * tt
                if has_noise:
                    ph_h += noise[n, it]
                for s in range(S):
                    xs = w_x[s, it]
                    quad = xi[n] * xi[n] if w_chirp[s] else 0.0
                    ph = ph_h + k * (quad - 2.0 * xi[n] * xs + xs * xs) / (2.0 * w_z[s]) + two_pi * w_f[s] * tt
                    acc_re[s] += math.cos(ph)
                    acc_im[s] += math.sin(ph)
            for s in range(S):
                out[s, it] = complex(acc_re[s], acc_im[s]) * (amp / N)
        return out


def link_products(xi, t, x_user, z_user, k, f_d, amp, noise, w_chirp, w_x, w_z, w_f, use_numba=None):
    use_numba = USE_NUMBA if use_numba is None else (use_numba and _HAVE_NUMBA)
    args = (
        np.ascontiguousarray(xi, dtype=np.float64),
        np.ascontiguousarray(t, dtype=np.float64),
        np.ascontiguousarray(x_user, dtype=np.float64),
        float(z_user),
        float(k),
        float(f_d),
        float(amp),
        np.ascontiguousarray(noise if noise is not None else np.empty((0, 0)), dtype=np.float64),
        np.ascontiguousarray(w_chirp, dtype=np.bool_),
        np.ascontiguousarray(np.atleast_2d(w_x), dtype=np.float64),
        np.ascontiguousarray(w_z, dtype=np.float64),
        np.ascontiguousarray(w_f, dtype=np.float64),
    )
    if use_numba:
        return _link_products_numba(*args)
    return _link_products_numpy(*args)


# -- direct O(N^2) Fresnel transform ------------------------------------------
#
# out[p] = lam_out[p] * sum_m u[m] * tw[(p * m) mod N],  tw[q] = exp(-2 pi j q / N)


def _direct_apply_numpy(u, lam_out, tw, block=256):
    N = u.size
    m = np.arange(N, dtype=np.int64)
    out = np.empty(N, dtype=np.complex128)
    for p0 in range(0, N, block):
        p = np.arange(p0, min(p0 + block, N), dtype=np.int64)
        out[p0 : p0 + p.size] = tw[np.outer(p, m) % N] @ u
    return out * lam_out


if _HAVE_NUMBA:

    @njit(cache=True)
    def _direct_apply_numba(u, lam_out, tw):
        N = u.size
        out = np.empty(N, dtype=np.complex128)
        for p in range(N):
            acc = 0.0 + 0.0j
            q = 0
            for m in range(N):
                acc += u[m] * tw[q]
                q += p
                if q >= N:
                    q -= N
            out[p] = acc * lam_out[p]
        return out


def direct_apply(u, lam_out, tw, use_numba: bool | None = None):
    use_numba = USE_NUMBA if use_numba is None else (use_numba and _HAVE_NUMBA)
    u = np.ascontiguousarray(u, dtype=np.complex128)
    lam_out = np.ascontiguousarray(lam_out, dtype=np.complex128)
    tw = np.ascontiguousarray(tw, dtype=np.complex128)
    if use_numba:
        return _direct_apply_numba(u, lam_out, tw)
    return _direct_apply_numpy(u, lam_out, tw)
