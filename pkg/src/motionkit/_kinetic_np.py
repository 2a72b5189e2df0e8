"""Pure-numpy implementation of the fused temporal-template kernel.

Reference backend; the compiled extension in ``_kinetic_c`` computes the
same quantity with explicit loops. Both derive everything from the raw
time offsets ``u = x - center``, so time-shift invariance is exact in
either backend.
"""

from __future__ import annotations

import math

import numpy as np


def temporal_mu(
    times: np.ndarray,
    centers: np.ndarray,
    coeffs: np.ndarray,
    sigma: float,
) -> np.ndarray:
    """Evaluate sum_j G*_{h,j}(x_f) * G'_{h,j}(x_f) for every frame and head.

    times: (F,) seconds; centers: (H, N) seconds; coeffs: (H, N, k+1, D).
    Returns (F, H, D).
    """
    F = times.shape[0]
    H, N, K1, D = coeffs.shape
    u = times[:, None, None] - centers[None, :, :]          # (F, H, N)
    scores = -((u / sigma) ** 2)
    scores -= scores.max(axis=2, keepdims=True)
    e = np.exp(scores)
    w = e / e.sum(axis=2, keepdims=True)                    # (F, H, N)

    inv_fact = np.array([1.0 / math.factorial(n) for n in range(K1)])
    powers = np.empty((K1, F, H, N))
    powers[0] = 1.0
    for n in range(1, K1):
        powers[n] = powers[n - 1] * u
    scaled = powers * inv_fact[:, None, None, None]
    # G'[f,h,j,:] then weighted sum over templates j
    taylor = np.einsum("nfhj,hjnd->fhjd", scaled, coeffs)
    return np.einsum("fhj,fhjd->fhd", w, taylor)
