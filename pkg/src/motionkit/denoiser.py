"""Body-part-aware denoiser: read-in/read-out, stylization, per-frame part
attention, and template-based temporal attention.

The model is forward-only: every parameter is drawn once from a seeded
generator (uniform, scaled by 1/sqrt(fan_in); biases zero) and never
trained here. Construction order of the parameter dict is fixed, so equal
(config, dataset_ids, seed) gives bitwise-equal models.

Masked cells are replaced right after read-in by per-part learnable empty
tokens, which makes the whole forward pass independent of the input values
at dropped cells.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import tensorio
from .condition import ConditionSet, _layer_norm, _softmax
from .errors import (
    ContractError,
    DimensionError,
    RegistryError,
    ValidationError,
)
from .kinetic import GlobalTemplateSet, temporal_mu
from .layout import NUM_PARTS, PART_NAMES, POSE_DIM, MotionSequence, canonical_layout
from .masks import BodyPartMask, MaskConvention

NUM_HEADS = 10
PLACEHOLDER_COUNT = 64
_FPS_FREQS = 2.0 ** -np.arange(8)


@dataclass(frozen=True)
class ModelConfig:
    """Denoiser hyperparameters. Heads and placeholder count are fixed by
    the representation (10 body parts, 64 placeholder tokens)."""

    latent_dim: int
    num_layers: int
    num_experts: int
    num_templates: int = 16
    taylor_order: int = 2
    sigma: float = 1.0
    heads: int = NUM_HEADS
    placeholder_count: int = PLACEHOLDER_COUNT
    preset: str = "custom"
    mask_prob: float = 0.1
    num_timesteps: int = 1000

    def __post_init__(self):
        for name in (
            "latent_dim",
            "num_layers",
            "num_experts",
            "num_templates",
            "num_timesteps",
        ):
            if getattr(self, name) < 1:
                raise ValidationError(f"{name} must be positive")
        if self.taylor_order < 0:
            raise ValidationError("taylor_order must be >= 0")
        if not self.sigma > 0:
            raise ValidationError("sigma must be positive")
        if self.heads != NUM_HEADS:
            raise ValidationError(f"heads is fixed at {NUM_HEADS}")
        if self.placeholder_count != PLACEHOLDER_COUNT:
            raise ValidationError(
                f"placeholder_count is fixed at {PLACEHOLDER_COUNT}"
            )
        if self.num_templates > self.latent_dim:
            raise ValidationError(
                "num_templates cannot exceed latent_dim (template j reads "
                "key channel j)"
            )
        if not 0.0 <= self.mask_prob <= 1.0:
            raise ValidationError("mask_prob must be in [0, 1]")

    @property
    def condition_width(self) -> int:
        return self.heads * self.latent_dim


PRESETS: dict[str, ModelConfig] = {
    "tiny": ModelConfig(64, 4, 16, num_templates=16, preset="tiny", mask_prob=0.1),
    "small": ModelConfig(64, 8, 16, num_templates=16, preset="small", mask_prob=0.2),
    "base": ModelConfig(128, 12, 16, num_templates=16, preset="base", mask_prob=0.3),
    "large": ModelConfig(128, 20, 32, num_templates=32, preset="large", mask_prob=0.4),
    # tiny configuration for tests and demos
    "desk": ModelConfig(8, 2, 4, num_templates=4, preset="desk", mask_prob=0.2),
}


def get_preset(name: str) -> ModelConfig:
    try:
        return PRESETS[name]
    except KeyError:
        raise ValidationError(
            f"unknown preset {name!r}; choose from {sorted(PRESETS)}"
        ) from None


@dataclass
class LatentMotion:
    """(F, H, D) latent grid plus each frame's real-time position."""

    grid: np.ndarray
    times: np.ndarray

    def __post_init__(self):
        self.grid = np.asarray(self.grid, dtype=np.float64)
        self.times = np.asarray(self.times, dtype=np.float64)
        if self.grid.ndim != 3 or self.grid.shape[1] != NUM_HEADS:
            raise DimensionError(
                f"grid must be (F, {NUM_HEADS}, D), got {self.grid.shape}"
            )
        if self.times.shape != (self.grid.shape[0],):
            raise DimensionError("times must have one entry per frame")
        if np.any(np.diff(self.times) <= 0):
            raise ValidationError("times must be strictly increasing")

    @property
    def num_frames(self) -> int:
        return self.grid.shape[0]

    @property
    def duration(self) -> float:
        return float(self.times[-1])


class Denoiser:
    """Forward pass of the part-aware diffusion denoiser.

    Parameters are immutable after construction (nothing in the forward
    path mutates them), so concurrent forward calls are safe.
    """

    def __init__(
        self,
        config: ModelConfig,
        dataset_ids: Sequence[str] = ("all", "synth"),
        seed: int = 0,
    ):
        self.config = config
        ids = set(dataset_ids) | {"all"}
        self.dataset_ids = tuple(sorted(ids))
        self.seed = seed
        layout = canonical_layout()
        self.part_indices = [layout.indices(name) for name in PART_NAMES]
        self.part_dims = [idx.shape[0] for idx in self.part_indices]
        self.params = self._init_params()

    # -- parameter construction -------------------------------------------

    def _init_params(self) -> dict[str, np.ndarray]:
        cfg = self.config
        D = cfg.latent_dim
        H = cfg.heads
        E = cfg.num_experts
        K1 = cfg.taylor_order + 1
        rng = np.random.default_rng(self.seed)
        p: dict[str, np.ndarray] = {}

        def lin(shape: tuple[int, ...], fan_in: int) -> np.ndarray:
            scale = 1.0 / np.sqrt(fan_in)
            return rng.uniform(-scale, scale, size=shape)

        for ds in self.dataset_ids:
            for i, dim in enumerate(self.part_dims):
                p[f"read_in.{ds}.p{i}.w"] = lin((D, dim), dim)
                p[f"read_in.{ds}.p{i}.b"] = np.zeros(D)
        p["empty_token"] = lin((H, D), D)
        for ds in self.dataset_ids:
            for i, dim in enumerate(self.part_dims):
                p[f"read_out.{ds}.p{i}.w"] = lin((dim, D), D)
                p[f"read_out.{ds}.p{i}.b"] = np.zeros(dim)

        p["embed.timestep"] = lin((cfg.num_timesteps, D), D)
        p["embed.fps.w"] = lin((D, 2 * _FPS_FREQS.shape[0]), 2 * _FPS_FREQS.shape[0])
        for ds in self.dataset_ids:
            p[f"embed.dataset.{ds}"] = lin((D,), D)

        for layer in range(cfg.num_layers):
            base = f"layer{layer}"
            p[f"{base}.styl.w_w"] = lin((H * D, D), D)
            p[f"{base}.styl.b_w"] = np.zeros(H * D)
            p[f"{base}.styl.w_b"] = lin((H * D, D), D)
            p[f"{base}.styl.b_b"] = np.zeros(H * D)
            for name in ("wq", "wk", "wv"):
                p[f"{base}.spatial.{name}"] = lin((D, D), D)
            p[f"{base}.temporal.kx"] = lin((H, D, D), D)
            p[f"{base}.temporal.vx"] = lin((H, D, D), D)
            p[f"{base}.temporal.gate"] = lin((H, D, E), D)
            p[f"{base}.temporal.expert_k"] = lin((H, E, D, D), D)
            p[f"{base}.temporal.expert_v"] = lin((H, E, D, D), D)
            p[f"{base}.temporal.phk"] = lin((H, PLACEHOLDER_COUNT, D), D)
            p[f"{base}.temporal.phv"] = lin((H, PLACEHOLDER_COUNT, D), D)
            p[f"{base}.temporal.center.w"] = lin((H, D), D)
            p[f"{base}.temporal.center.b"] = np.zeros(H)
            p[f"{base}.temporal.coef"] = lin((H, K1, D, D), D)
            p[f"{base}.temporal.out.w"] = lin((H, D, D), D)
            p[f"{base}.temporal.out.b"] = np.zeros((H, D))
            p[f"{base}.ff.w1"] = lin((4 * D, D), D)
            p[f"{base}.ff.b1"] = np.zeros(4 * D)
            p[f"{base}.ff.w2"] = lin((D, 4 * D), 4 * D)
            p[f"{base}.ff.b2"] = np.zeros(D)
        return p

    def _check_dataset(self, dataset_id: str) -> str:
        if dataset_id not in self.dataset_ids:
            raise RegistryError(
                f"dataset {dataset_id!r} is not registered; known: {self.dataset_ids}"
            )
        return dataset_id

    # -- core operations ------------------------------------------------------

    def read_in(
        self,
        seq: MotionSequence,
        drop_mask: Optional[BodyPartMask] = None,
        dataset_id: str = "all",
    ) -> LatentMotion:
        """Map each part's raw slice to the latent width, then substitute
        learnable empty tokens wherever the drop mask is set."""
        self._check_dataset(dataset_id)
        F = seq.num_frames
        if drop_mask is None:
            drop_mask = BodyPartMask.zeros(F, MaskConvention.DROP)
        if drop_mask.convention is not MaskConvention.DROP:
            raise ContractError("read_in expects a Drop-convention mask")
        if drop_mask.num_frames != F:
            raise DimensionError("drop mask frame count does not match sequence")
        D = self.config.latent_dim
        grid = np.empty((F, NUM_HEADS, D))
        for i in range(NUM_PARTS):
            w = self.params[f"read_in.{dataset_id}.p{i}.w"]
            b = self.params[f"read_in.{dataset_id}.p{i}.b"]
            grid[:, i, :] = seq.data[:, self.part_indices[i]] @ w.T + b
        empty = self.params["empty_token"]
        dropped = drop_mask.grid.astype(bool)
        grid[dropped] = np.broadcast_to(empty[None], (F, NUM_HEADS, D))[dropped]
        return LatentMotion(grid=grid, times=seq.times())

    def read_out(
        self,
        latent: LatentMotion,
        dataset_id: str = "all",
        like: Optional[MotionSequence] = None,
    ) -> MotionSequence:
        """Project each head back to its part's raw dims and reassemble.

        Sequence metadata is copied from ``like`` when given; otherwise the
        fps is recovered from the latent's frame times.
        """
        self._check_dataset(dataset_id)
        F = latent.num_frames
        data = np.empty((F, POSE_DIM))
        for i in range(NUM_PARTS):
            w = self.params[f"read_out.{dataset_id}.p{i}.w"]
            b = self.params[f"read_out.{dataset_id}.p{i}.b"]
            data[:, self.part_indices[i]] = latent.grid[:, i, :] @ w.T + b
        if like is not None:
            return MotionSequence(
                data=data,
                fps=like.fps,
                parts_present=like.parts_present.copy(),
                dataset=like.dataset,
            )
        fps = 1.0 / float(latent.times[1] - latent.times[0]) if F >= 2 else 30.0
        return MotionSequence(data=data, fps=fps)

    def _style_embedding(self, t_step: int, fps: float, dataset_id: str) -> np.ndarray:
        cfg = self.config
        if not 0 <= t_step < cfg.num_timesteps:
            raise ValidationError(
                f"t_step must be in [0, {cfg.num_timesteps}), got {t_step}"
            )
        feats = np.concatenate([np.sin(fps * _FPS_FREQS), np.cos(fps * _FPS_FREQS)])
        return (
            self.params["embed.timestep"][t_step]
            + self.params["embed.fps.w"] @ feats
            + self.params[f"embed.dataset.{dataset_id}"]
        )

    def stylize(
        self,
        latent: LatentMotion,
        t_step: int,
        fps: float,
        dataset_id: str = "all",
        layer: int = 0,
    ) -> LatentMotion:
        """Per-frame affine modulation: grid * e_w + e_b (Hadamard)."""
        self._check_dataset(dataset_id)
        e = self._style_embedding(t_step, fps, dataset_id)
        H, D = NUM_HEADS, self.config.latent_dim
        p = self.params
        e_w = (p[f"layer{layer}.styl.w_w"] @ e + p[f"layer{layer}.styl.b_w"]).reshape(H, D)
        e_b = (p[f"layer{layer}.styl.w_b"] @ e + p[f"layer{layer}.styl.b_b"]).reshape(H, D)
        return LatentMotion(grid=latent.grid * e_w + e_b, times=latent.times)

    def spatial_attention(
        self,
        latent: LatentMotion,
        available: Optional[np.ndarray] = None,
        layer: int = 0,
    ) -> np.ndarray:
        """Per-frame scaled dot-product attention over the 10 part tokens.

        ``available`` is an (F, 10) bool array; unavailable parts are
        excluded from the keys but still receive outputs.
        """
        grid = latent.grid
        F = grid.shape[0]
        if available is None:
            available = np.ones((F, NUM_HEADS), dtype=bool)
        available = np.asarray(available, dtype=bool)
        if available.shape != (F, NUM_HEADS):
            raise DimensionError(f"available must be ({F}, {NUM_HEADS})")
        if not np.all(available.any(axis=1)):
            raise ContractError("every frame needs at least one available part")
        p = self.params
        q = grid @ p[f"layer{layer}.spatial.wq"].T
        k = grid @ p[f"layer{layer}.spatial.wk"].T
        v = grid @ p[f"layer{layer}.spatial.wv"].T
        scores = np.einsum("fhd,fgd->fhg", q, k) / np.sqrt(self.config.latent_dim)
        scores = np.where(available[:, None, :], scores, -np.inf)
        att = _softmax(scores, axis=-1)
        return np.einsum("fhg,fgd->fhd", att, v)

    # -- temporal branch ----------------------------------------------------

    def _condition_tokens(self, conditions: Optional[ConditionSet]) -> np.ndarray:
        """Stack refined condition tokens into (C, H, D); C may be 0."""
        cfg = self.config
        if conditions is None:
            conditions = ConditionSet()
        conditions.check_width(cfg.condition_width)
        mats = [conditions.get(m) for m in conditions.present()]
        if not mats:
            return np.zeros((0, NUM_HEADS, cfg.latent_dim))
        stacked = np.concatenate(mats, axis=0)
        return stacked.reshape(-1, NUM_HEADS, cfg.latent_dim)

    def _stream_kv(
        self, latent: LatentMotion, conditions: Optional[ConditionSet], layer: int
    ):
        """K/V for the motion stream and the placeholder+condition stream."""
        p = self.params
        base = f"layer{layer}.temporal"
        grid = latent.grid
        k_x = np.einsum("fhd,hkd->fhk", grid, p[f"{base}.kx"])
        v_x = np.einsum("fhd,hkd->fhk", grid, p[f"{base}.vx"])

        cond = self._condition_tokens(conditions)
        if cond.shape[0]:
            gate = _softmax(np.einsum("chd,hde->che", cond, p[f"{base}.gate"]), axis=-1)
            k_e = np.einsum("chd,hekd->chek", cond, p[f"{base}.expert_k"])
            v_e = np.einsum("chd,hekd->chek", cond, p[f"{base}.expert_v"])
            k_cond = np.einsum("che,chek->chk", gate, k_e)
            v_cond = np.einsum("che,chek->chk", gate, v_e)
            k_c = np.concatenate([p[f"{base}.phk"].transpose(1, 0, 2), k_cond], axis=0)
            v_c = np.concatenate([p[f"{base}.phv"].transpose(1, 0, 2), v_cond], axis=0)
        else:
            k_c = p[f"{base}.phk"].transpose(1, 0, 2)
            v_c = p[f"{base}.phv"].transpose(1, 0, 2)
        return k_x, v_x, k_c, v_c

    def template_stream_weights(
        self,
        latent: LatentMotion,
        conditions: Optional[ConditionSet] = None,
        layer: int = 0,
    ):
        """Per-channel token weights of both streams (each sums to 1 over
        its token axis). Exposed for verification."""
        k_x, _, k_c, _ = self._stream_kv(latent, conditions, layer)
        return _softmax(k_x, axis=0), _softmax(k_c, axis=0)

    def moe_gate_weights(
        self,
        conditions: ConditionSet,
        layer: int = 0,
    ) -> np.ndarray:
        """(C, H, E) expert mixture weights for the condition tokens."""
        cond = self._condition_tokens(conditions)
        gate = np.einsum(
            "chd,hde->che", cond, self.params[f"layer{layer}.temporal.gate"]
        )
        return _softmax(gate, axis=-1)

    def build_templates(
        self,
        latent: LatentMotion,
        conditions: Optional[ConditionSet] = None,
        layer: int = 0,
    ) -> GlobalTemplateSet:
        """Aggregate motion and condition streams into global templates.

        Each stream is softmax-normalized over its own token axis per key
        channel; template j sums both streams' values weighted by channel
        j. Linear projections of the pooled feature give the center (squashed
        into [0, clip duration]) and the Taylor coefficients.
        """
        cfg = self.config
        N = cfg.num_templates
        p = self.params
        base = f"layer{layer}.temporal"
        k_x, v_x, k_c, v_c = self._stream_kv(latent, conditions, layer)
        w_x = _softmax(k_x, axis=0)[:, :, :N]
        w_c = _softmax(k_c, axis=0)[:, :, :N]
        pooled = np.einsum("fhj,fhd->hjd", w_x, v_x) + np.einsum(
            "chj,chd->hjd", w_c, v_c
        )
        raw_centers = (
            np.einsum("hjd,hd->hj", pooled, p[f"{base}.center.w"])
            + p[f"{base}.center.b"][:, None]
        )
        centers = latent.duration / (1.0 + np.exp(-raw_centers))
        coeffs = np.einsum("hjd,hnkd->hjnk", pooled, p[f"{base}.coef"])
        return GlobalTemplateSet(centers=centers, coeffs=coeffs, sigma=cfg.sigma)

    def temporal_attention(
        self, latent: LatentMotion, templates: GlobalTemplateSet, layer: int = 0
    ) -> np.ndarray:
        """Mix template signals at each frame's real time, then apply the
        per-head output projection."""
        if templates.coeffs.shape[3] != self.config.latent_dim:
            raise DimensionError("template width does not match the model")
        mu = temporal_mu(latent.times, templates)
        p = self.params
        base = f"layer{layer}.temporal"
        return np.einsum("fhd,hkd->fhk", mu, p[f"{base}.out.w"]) + p[f"{base}.out.b"]

    # -- full forward -------------------------------------------------------

    def forward(
        self,
        x_t: MotionSequence,
        t_step: int,
        drop_mask: Optional[BodyPartMask] = None,
        conditions: Optional[ConditionSet] = None,
        dataset_id: str = "all",
    ) -> MotionSequence:
        """Predict the clean sequence from a noised one.

        Composition per layer: pre-norm + stylization, then the two
        attention branches in parallel (their sum is the block output,
        added residually), then a position-wise feed-forward.
        """
        self._check_dataset(dataset_id)
        latent = self.read_in(x_t, drop_mask, dataset_id)
        h = latent.grid
        times = latent.times
        for layer in range(self.config.num_layers):
            a = LatentMotion(grid=_layer_norm(h), times=times)
            a = self.stylize(a, t_step, x_t.fps, dataset_id, layer)
            y_s = self.spatial_attention(a, layer=layer)
            templates = self.build_templates(a, conditions, layer)
            y_t = self.temporal_attention(a, templates, layer)
            h = h + y_s + y_t
            b = _layer_norm(h)
            p = self.params
            hidden = np.maximum(
                b @ p[f"layer{layer}.ff.w1"].T + p[f"layer{layer}.ff.b1"], 0.0
            )
            h = h + hidden @ p[f"layer{layer}.ff.w2"].T + p[f"layer{layer}.ff.b2"]
        return self.read_out(LatentMotion(grid=h, times=times), dataset_id, like=x_t)

    # -- persistence --------------------------------------------------------

    def save_params(self, path) -> None:
        tensorio.write_tensors(path, self.params)

    def load_params(self, path) -> None:
        loaded = tensorio.read_tensors(path)
        if set(loaded) != set(self.params):
            raise ValidationError("parameter names do not match this model")
        for name, arr in loaded.items():
            if arr.shape != self.params[name].shape:
                raise DimensionError(
                    f"shape mismatch for {name}: {arr.shape} vs "
                    f"{self.params[name].shape}"
                )
        self.params = loaded
