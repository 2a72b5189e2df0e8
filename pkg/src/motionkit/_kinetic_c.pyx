# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled fused temporal-template kernel (hot loop of the denoiser).

Same contract as ``_kinetic_np.temporal_mu``; see that module for the
reference semantics.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp

cnp.import_array()


def temporal_mu(
    double[::1] times,
    double[:, ::1] centers,
    double[:, :, :, ::1] coeffs,
    double sigma,
):
    cdef Py_ssize_t F = times.shape[0]
    cdef Py_ssize_t H = coeffs.shape[0]
    cdef Py_ssize_t N = coeffs.shape[1]
    cdef Py_ssize_t K1 = coeffs.shape[2]
    cdef Py_ssize_t D = coeffs.shape[3]

    out_arr = np.zeros((F, H, D), dtype=np.float64)
    cdef double[:, :, ::1] out = out_arr
    inv_fact_arr = np.empty(K1, dtype=np.float64)
    cdef double[::1] inv_fact = inv_fact_arr
    u_arr = np.empty(N, dtype=np.float64)
    cdef double[::1] u = u_arr
    w_arr = np.empty(N, dtype=np.float64)
    cdef double[::1] w = w_arr

    cdef Py_ssize_t f, h, j, n, d
    cdef double fact = 1.0
    cdef double smax, z, acc, weight, pw, c

    for n in range(K1):
        if n > 0:
            fact *= n
        inv_fact[n] = 1.0 / fact

    for f in range(F):
        for h in range(H):
            smax = -1e300
            for j in range(N):
                u[j] = times[f] - centers[h, j]
                w[j] = -(u[j] / sigma) * (u[j] / sigma)
                if w[j] > smax:
                    smax = w[j]
            z = 0.0
            for j in range(N):
                w[j] = exp(w[j] - smax)
                z += w[j]
            for j in range(N):
                weight = w[j] / z
                pw = 1.0
                for n in range(K1):
                    c = weight * inv_fact[n] * pw
                    for d in range(D):
                        out[f, h, d] += c * coeffs[h, j, n, d]
                    pw *= u[j]
    return out_arr
