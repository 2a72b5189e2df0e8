"""Temporal global templates: Gaussian soft-assignment over time plus a
Taylor-expanded latent signal per template.

Each template is a temporal anchor: a center time, a spread shared across
the set, and per-channel coefficients read as state / velocity /
acceleration (order 0..k). A frame at time x mixes the templates with
softmax(-(x - center)^2 / sigma^2) weights; both the weights and the
polynomial depend on time only through x - center, which is what makes
shifting all centers by a constant equivalent to shifting the query times.

The fused evaluation (weights times polynomial, summed over templates) is
the hot kernel: it runs once per layer per denoising step. A compiled
backend is used when available; set MOTIONKIT_PURE_PYTHON=1 to force the
numpy fallback.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, replace

import numpy as np

from . import _kinetic_np
from .errors import DimensionError, ValidationError

if os.environ.get("MOTIONKIT_PURE_PYTHON"):
    _impl = _kinetic_np
else:
    try:
        from . import _kinetic_c as _impl  # type: ignore[attr-defined]
    except ImportError:
        _impl = _kinetic_np


def backend_name() -> str:
    """'compiled' when the extension is active, else 'numpy'."""
    return "compiled" if _impl.__name__.endswith("_kinetic_c") else "numpy"


@dataclass(frozen=True)
class GlobalTemplateSet:
    """Per-head temporal templates.

    centers: (H, N) seconds; coeffs: (H, N, k+1, D) Taylor coefficients
    per latent channel; sigma: shared spread in seconds.
    """

    centers: np.ndarray
    coeffs: np.ndarray
    sigma: float

    def __post_init__(self):
        object.__setattr__(self, "centers", np.asarray(self.centers, dtype=np.float64))
        object.__setattr__(self, "coeffs", np.asarray(self.coeffs, dtype=np.float64))
        if self.coeffs.ndim != 4:
            raise DimensionError(
                f"coeffs must be (H, N, k+1, D), got {self.coeffs.shape}"
            )
        if self.centers.shape != self.coeffs.shape[:2]:
            raise DimensionError(
                f"centers {self.centers.shape} do not match coeffs "
                f"{self.coeffs.shape[:2]}"
            )
        if not self.sigma > 0:
            raise ValidationError(f"sigma must be positive, got {self.sigma}")
        if not np.all(np.isfinite(self.centers)):
            raise ValidationError("template centers must be finite")

    @property
    def num_heads(self) -> int:
        return self.centers.shape[0]

    @property
    def num_templates(self) -> int:
        return self.centers.shape[1]

    @property
    def taylor_order(self) -> int:
        return self.coeffs.shape[2] - 1


def shift_templates(templates: GlobalTemplateSet, delta: float) -> GlobalTemplateSet:
    """Move every center by ``delta`` seconds; coefficients and sigma stay."""
    return replace(templates, centers=templates.centers + delta)


def temporal_weights(x: float, centers: np.ndarray, sigma: float) -> np.ndarray:
    """softmax_j of -(x - center_j)^2 / sigma^2 for one query time."""
    if not sigma > 0:
        raise ValidationError(f"sigma must be positive, got {sigma}")
    centers = np.asarray(centers, dtype=np.float64)
    scores = -(((x - centers) / sigma) ** 2)
    scores = scores - scores.max()
    e = np.exp(scores)
    return e / e.sum()


def weight_grad(x: float, centers: np.ndarray, sigma: float) -> np.ndarray:
    """d/dx of :func:`temporal_weights`, via the softmax Jacobian.

    With s_j = -(x - c_j)^2 / sigma^2 and w = softmax(s):
    dw_j/dx = w_j * (s'_j - sum_l w_l s'_l), s'_j = -2 (x - c_j) / sigma^2.
    """
    centers = np.asarray(centers, dtype=np.float64)
    w = temporal_weights(x, centers, sigma)
    sprime = -2.0 * (x - centers) / (sigma * sigma)
    return w * (sprime - np.dot(w, sprime))


def taylor_eval(
    coeffs: np.ndarray, center: float, x: float
) -> np.ndarray:
    """Evaluate sum_n coeffs[n] / n! * (x - center)^n.

    coeffs: (k+1, D) or (k+1,); returns the matching trailing shape.
    """
    coeffs = np.asarray(coeffs, dtype=np.float64)
    u = x - center
    out = np.zeros(coeffs.shape[1:])
    pw = 1.0
    for n in range(coeffs.shape[0]):
        out = out + coeffs[n] * (pw / math.factorial(n))
        pw *= u
    return out


def temporal_mu(
    times: np.ndarray, templates: GlobalTemplateSet
) -> np.ndarray:
    """Fused template mixture for all frames: (F, H, D).

    out[f, h, :] = sum_j weights_{h,j}(x_f) * taylor_{h,j}(x_f).
    """
    times = np.ascontiguousarray(times, dtype=np.float64)
    if times.ndim != 1:
        raise DimensionError(f"times must be 1-D, got shape {times.shape}")
    centers = np.ascontiguousarray(templates.centers)
    coeffs = np.ascontiguousarray(templates.coeffs)
    return np.asarray(_impl.temporal_mu(times, centers, coeffs, templates.sigma))


def temporal_mu_reference(
    times: np.ndarray, templates: GlobalTemplateSet
) -> np.ndarray:
    """Always-numpy evaluation, regardless of the selected backend."""
    times = np.ascontiguousarray(times, dtype=np.float64)
    return _kinetic_np.temporal_mu(
        times, templates.centers, templates.coeffs, templates.sigma
    )
