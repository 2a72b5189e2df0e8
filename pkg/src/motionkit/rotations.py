"""6D rotation encoding and small rotation helpers.

The 6D encoding is the concatenation of the first two columns of the
rotation matrix; decoding runs Gram-Schmidt on the two columns and takes
the cross product for the third. The map is scale-invariant and continuous
on non-degenerate inputs.
"""

from __future__ import annotations

import numpy as np

from .errors import SingularRotationError

_DEGENERATE_TOL = 1e-9


def rot6d_to_matrix(r6: np.ndarray) -> np.ndarray:
    """Decode one or many 6D rotations into 3x3 matrices.

    Accepts shape (..., 6); returns (..., 3, 3). Raises
    SingularRotationError when the first column is (near) zero or the two
    columns are (near) parallel.
    """
    r6 = np.asarray(r6, dtype=np.float64)
    if r6.shape[-1] != 6:
        raise SingularRotationError(f"expected trailing dim 6, got {r6.shape}")
    a1 = r6[..., 0:3]
    a2 = r6[..., 3:6]
    n1 = np.linalg.norm(a1, axis=-1, keepdims=True)
    if np.any(n1 < _DEGENERATE_TOL):
        raise SingularRotationError("first rotation column is numerically zero")
    b1 = a1 / n1
    proj = np.sum(b1 * a2, axis=-1, keepdims=True)
    u2 = a2 - proj * b1
    n2 = np.linalg.norm(u2, axis=-1, keepdims=True)
    if np.any(n2 < _DEGENERATE_TOL):
        raise SingularRotationError("rotation columns are numerically parallel")
    b2 = u2 / n2
    b3 = np.cross(b1, b2)
    return np.stack([b1, b2, b3], axis=-1)


def matrix_to_rot6d(m: np.ndarray) -> np.ndarray:
    """First two columns of (..., 3, 3) matrices, concatenated to (..., 6)."""
    m = np.asarray(m, dtype=np.float64)
    if m.shape[-2:] != (3, 3):
        raise SingularRotationError(f"expected trailing shape (3, 3), got {m.shape}")
    return np.concatenate([m[..., :, 0], m[..., :, 1]], axis=-1)


def rotation_about_y(angle) -> np.ndarray:
    """R_y for one angle or an array of angles; maps local +Z to the heading.

    Column-vector convention: ``R_y(a) @ (0, 0, 1) == (sin a, 0, cos a)``.
    """
    a = np.asarray(angle, dtype=np.float64)
    c, s = np.cos(a), np.sin(a)
    out = np.zeros(a.shape + (3, 3))
    out[..., 0, 0] = c
    out[..., 0, 2] = s
    out[..., 1, 1] = 1.0
    out[..., 2, 0] = -s
    out[..., 2, 2] = c
    return out


def wrap_angle(a):
    """Wrap angles to (-pi, pi]; values already in range pass through bitwise."""
    a = np.asarray(a, dtype=np.float64)
    two_pi = 2.0 * np.pi
    out = a - two_pi * np.floor((a + np.pi) / two_pi)
    return np.where(out == -np.pi, np.pi, out)
