"""DDPM noise schedule, forward noising, and the reverse sampler.

The denoiser predicts the clean sequence x0 directly (not the noise), so
the reverse step uses the x0-parameterized posterior mean with the
beta-tilde posterior variance. Completion tasks are handled by
known-region replacement: before every denoiser call, cells the visibility
mask marks as given are overwritten with a correctly-noised version of the
known data, and the final output restores them bitwise.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np

from .condition import ConditionSet
from .errors import ContractError, DimensionError, ValidationError
from .layout import NUM_PARTS, PART_NAMES, POSE_DIM, MotionSequence, canonical_layout
from .masks import BodyPartMask, MaskConvention

RngLike = Union[int, np.random.Generator]


def _as_rng(rng: RngLike) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


@dataclass(frozen=True)
class NoiseSchedule:
    """Per-step beta with the derived alpha and running-product alpha_bar.

    Step indices are 1-based (t in [1, T]); arrays are 0-indexed, so
    ``beta[t - 1]`` belongs to step t. ``alpha_bar_prev(1)`` is 1 by
    definition.
    """

    beta: np.ndarray

    def __post_init__(self):
        beta = np.asarray(self.beta, dtype=np.float64)
        object.__setattr__(self, "beta", beta)
        if beta.ndim != 1 or beta.shape[0] < 1:
            raise ValidationError("beta must be a non-empty 1-D array")
        if np.any(beta <= 0) or np.any(beta >= 1):
            raise ValidationError("every beta must lie in (0, 1)")
        alpha_bar = np.cumprod(1.0 - beta)
        if np.any(np.diff(alpha_bar) >= 0):
            raise ValidationError("alpha_bar must be strictly decreasing")

    @property
    def T(self) -> int:
        return self.beta.shape[0]

    @property
    def alpha(self) -> np.ndarray:
        return 1.0 - self.beta

    @property
    def alpha_bar(self) -> np.ndarray:
        return np.cumprod(1.0 - self.beta)

    def alpha_bar_at(self, t: int) -> float:
        """alpha_bar for 1-based step t; t = 0 gives 1 (no noise)."""
        if not 0 <= t <= self.T:
            raise ValidationError(f"t must be in [0, {self.T}], got {t}")
        if t == 0:
            return 1.0
        return float(self.alpha_bar[t - 1])


def make_schedule(
    T: int = 1000, beta_start: float = 1e-4, beta_end: float = 2e-2
) -> NoiseSchedule:
    """Linear beta schedule over T steps."""
    if T < 1:
        raise ValidationError(f"T must be >= 1, got {T}")
    if not 0 < beta_start <= beta_end < 1:
        raise ValidationError(
            f"need 0 < beta_start <= beta_end < 1, got ({beta_start}, {beta_end})"
        )
    return NoiseSchedule(beta=np.linspace(beta_start, beta_end, T))


def q_sample(
    x0: np.ndarray, t: int, noise: np.ndarray, schedule: NoiseSchedule
) -> np.ndarray:
    """Forward noising: sqrt(a_bar_t) * x0 + sqrt(1 - a_bar_t) * noise."""
    x0 = np.asarray(x0, dtype=np.float64)
    noise = np.asarray(noise, dtype=np.float64)
    if x0.shape != noise.shape:
        raise DimensionError(f"shape mismatch: {x0.shape} vs {noise.shape}")
    if not 1 <= t <= schedule.T:
        raise ValidationError(f"t must be in [1, {schedule.T}], got {t}")
    a_bar = schedule.alpha_bar_at(t)
    return np.sqrt(a_bar) * x0 + np.sqrt(1.0 - a_bar) * noise


def ddpm_step(
    x_t: np.ndarray,
    x0_pred: np.ndarray,
    t: int,
    schedule: NoiseSchedule,
    rng: RngLike = 0,
) -> np.ndarray:
    """One reverse step x_t -> x_{t-1} from an x0 prediction.

    Posterior mean is the standard x0-weighted form; noise variance is
    beta_tilde_t = beta_t * (1 - a_bar_{t-1}) / (1 - a_bar_t). At t = 1
    the posterior collapses onto x0_pred (a_bar_0 = 1): no noise, returned
    exactly.
    """
    x_t = np.asarray(x_t, dtype=np.float64)
    x0_pred = np.asarray(x0_pred, dtype=np.float64)
    if x_t.shape != x0_pred.shape:
        raise DimensionError(f"shape mismatch: {x_t.shape} vs {x0_pred.shape}")
    if not 1 <= t <= schedule.T:
        raise ValidationError(f"t must be in [1, {schedule.T}], got {t}")
    if t == 1:
        return x0_pred.copy()
    beta_t = float(schedule.beta[t - 1])
    alpha_t = 1.0 - beta_t
    a_bar_t = schedule.alpha_bar_at(t)
    a_bar_prev = schedule.alpha_bar_at(t - 1)
    coef_x0 = np.sqrt(a_bar_prev) * beta_t / (1.0 - a_bar_t)
    coef_xt = np.sqrt(alpha_t) * (1.0 - a_bar_prev) / (1.0 - a_bar_t)
    mean = coef_x0 * x0_pred + coef_xt * x_t
    var = beta_t * (1.0 - a_bar_prev) / (1.0 - a_bar_t)
    return mean + np.sqrt(var) * _as_rng(rng).standard_normal(x_t.shape)


def guided_x0(
    cond_pred: np.ndarray, uncond_pred: np.ndarray, scale: float
) -> np.ndarray:
    """Classifier-free-guidance blend: uncond + s * (cond - uncond)."""
    cond_pred = np.asarray(cond_pred, dtype=np.float64)
    uncond_pred = np.asarray(uncond_pred, dtype=np.float64)
    if cond_pred.shape != uncond_pred.shape:
        raise DimensionError(
            f"shape mismatch: {cond_pred.shape} vs {uncond_pred.shape}"
        )
    return uncond_pred + scale * (cond_pred - uncond_pred)


def expand_part_weights(weights: np.ndarray) -> np.ndarray:
    """Broadcast (F, 10) per-part weights to (F, 669) feature weights."""
    weights = np.asarray(weights, dtype=np.float64)
    if weights.ndim != 2 or weights.shape[1] != NUM_PARTS:
        raise DimensionError(f"weights must be (F, {NUM_PARTS}), got {weights.shape}")
    layout = canonical_layout()
    out = np.empty((weights.shape[0], POSE_DIM))
    for i, name in enumerate(PART_NAMES):
        out[:, layout.indices(name)] = weights[:, i : i + 1]
    return out


def training_loss(
    x0_pred: np.ndarray, x0: np.ndarray, weights: np.ndarray
) -> float:
    """Mean squared error over the cells with weight 1.

    ``weights`` is the (F, 10) grid from loss_weights; weight-0 cells are
    excluded from numerator and denominator alike.
    """
    x0_pred = np.asarray(x0_pred, dtype=np.float64)
    x0 = np.asarray(x0, dtype=np.float64)
    if x0_pred.shape != x0.shape:
        raise DimensionError(f"shape mismatch: {x0_pred.shape} vs {x0.shape}")
    feat = expand_part_weights(weights)
    if feat.shape != x0.shape:
        raise DimensionError(
            f"weights cover {feat.shape}, data is {x0.shape}"
        )
    total = feat.sum()
    if total == 0:
        raise ContractError("all-zero loss weights leave nothing to supervise")
    return float(np.sum(feat * (x0_pred - x0) ** 2) / total)


DenoiseFn = Callable[[MotionSequence, int, Optional[ConditionSet]], MotionSequence]


def sample(
    denoise_fn: DenoiseFn,
    num_frames: int,
    fps: float,
    schedule: NoiseSchedule,
    visibility: Optional[BodyPartMask] = None,
    known: Optional[MotionSequence] = None,
    conditions: Optional[ConditionSet] = None,
    guidance_scale: float = 1.0,
    rng_seed: RngLike = 0,
    dataset: str = "all",
) -> MotionSequence:
    """Run the reverse chain from unit Gaussian noise.

    ``denoise_fn(seq, t_step, conditions)`` must return the x0 prediction;
    ``t_step`` is 0-based in [0, T). Cells with visibility 1 are
    re-imposed from ``known`` (noised to the current level) before every
    call, and the final output carries ``known`` there bitwise.

    Guidance runs a second, unconditional prediction per step when
    ``guidance_scale != 1`` and conditions are present. Drop masks are a
    separate pathway (empty tokens at read-in, applied inside
    ``denoise_fn``); visibility only drives replacement here.
    """
    rng = _as_rng(rng_seed)
    if visibility is not None:
        if visibility.convention is not MaskConvention.VISIBILITY:
            raise ContractError("sample expects a Visibility-convention mask")
        if visibility.num_frames != num_frames:
            raise DimensionError("visibility mask frame count mismatch")
    has_visible = visibility is not None and visibility.grid.any()
    if has_visible:
        if known is None:
            raise ContractError(
                "visibility marks given frames but no known sequence was passed"
            )
        if known.num_frames != num_frames:
            raise DimensionError("known sequence frame count mismatch")
        vis_cells = expand_part_weights(visibility.grid).astype(bool)

    x = rng.standard_normal((num_frames, POSE_DIM))
    use_guidance = (
        guidance_scale != 1.0 and conditions is not None and not conditions.is_empty()
    )
    for t in range(schedule.T, 0, -1):
        if has_visible:
            if t - 1 >= 1:
                noised = q_sample(
                    known.data, t - 1, rng.standard_normal(known.data.shape), schedule
                )
            else:
                noised = known.data
            x[vis_cells] = noised[vis_cells]
        seq_t = MotionSequence(
            data=x,
            fps=fps,
            parts_present=(
                known.parts_present.copy()
                if known is not None
                else np.ones(NUM_PARTS, dtype=bool)
            ),
            dataset=dataset,
        )
        x0_pred = denoise_fn(seq_t, t - 1, conditions).data
        if use_guidance:
            uncond = denoise_fn(seq_t, t - 1, ConditionSet()).data
            x0_pred = guided_x0(x0_pred, uncond, guidance_scale)
        x = ddpm_step(x, x0_pred, t, schedule, rng)
    if has_visible:
        x[vis_cells] = known.data[vis_cells]
    return MotionSequence(
        data=x,
        fps=fps,
        parts_present=(
            known.parts_present.copy()
            if known is not None
            else np.ones(NUM_PARTS, dtype=bool)
        ),
        dataset=dataset,
    )
