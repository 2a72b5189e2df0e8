"""Task masks, training drop masks, and loss weights.

Two mask conventions coexist and are easy to confuse, so the convention is
part of the type:

* Visibility: 1 = the frame is given context the model must preserve
  (completion tasks).
* Drop: 1 = the cell's input is replaced by a learnable empty token
  (missing source data, or training-time augmentation).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ContractError, DimensionError, ValidationError
from .layout import NUM_PARTS


class MaskConvention(enum.Enum):
    VISIBILITY = "visibility"
    DROP = "drop"


class Task(enum.Enum):
    T2M = "t2m"    # text-to-motion
    A2M = "a2m"    # action-to-motion
    M2D = "m2d"    # music-to-dance
    S2G = "s2g"    # speech-to-gesture
    MIM = "mim"    # motion imitation
    MP = "mp"      # motion prediction
    MIN = "min"    # motion in-betweening
    CMP = "cmp"    # conditional motion prediction
    CMI = "cmi"    # conditional motion in-betweening
    MMG = "mmg"    # multi-condition generation


# tasks whose visibility mask has a prefix / interior boundary
PREFIX_TASKS = (Task.MP, Task.CMP)
INTERIOR_TASKS = (Task.MIN, Task.CMI)


@dataclass
class BodyPartMask:
    """(F, 10) binary grid with an explicit convention."""

    grid: np.ndarray
    convention: MaskConvention

    def __post_init__(self):
        self.grid = np.asarray(self.grid, dtype=np.uint8)
        if self.grid.ndim != 2 or self.grid.shape[1] != NUM_PARTS:
            raise DimensionError(
                f"mask grid must be (F, {NUM_PARTS}), got {self.grid.shape}"
            )
        if not np.all((self.grid == 0) | (self.grid == 1)):
            raise ValidationError("mask grid must be binary")

    @property
    def num_frames(self) -> int:
        return self.grid.shape[0]

    def complement(self) -> "BodyPartMask":
        flipped = (
            MaskConvention.DROP
            if self.convention is MaskConvention.VISIBILITY
            else MaskConvention.VISIBILITY
        )
        return BodyPartMask(grid=1 - self.grid, convention=flipped)

    @classmethod
    def zeros(cls, frames: int, convention: MaskConvention) -> "BodyPartMask":
        return cls(np.zeros((frames, NUM_PARTS), dtype=np.uint8), convention)

    @classmethod
    def ones(cls, frames: int, convention: MaskConvention) -> "BodyPartMask":
        return cls(np.ones((frames, NUM_PARTS), dtype=np.uint8), convention)


@dataclass
class TaskSpec:
    """A task id plus its mask boundary frame indices (1-based)."""

    task: Task
    k: Optional[int] = None
    k1: Optional[int] = None
    k2: Optional[int] = None
    modalities: frozenset = frozenset()

    def __post_init__(self):
        if self.task in PREFIX_TASKS:
            if self.k is None:
                raise ValidationError(f"{self.task.value} requires a boundary k")
        elif self.task in INTERIOR_TASKS:
            if self.k1 is None or self.k2 is None:
                raise ValidationError(f"{self.task.value} requires k1 and k2")
            if not self.k1 < self.k2:
                raise ValidationError(f"need k1 < k2, got ({self.k1}, {self.k2})")


def task_mask(spec: TaskSpec, num_frames: int) -> BodyPartMask:
    """Visibility mask for a task over ``num_frames`` frames.

    Prefix tasks keep frames x <= k visible; in-betweening tasks hide
    frames k1 < x <= k2. Frame indices are 1-based. Pure-condition tasks
    get an all-zero mask (everything is synthesized).
    """
    grid = np.zeros((num_frames, NUM_PARTS), dtype=np.uint8)
    if spec.task in PREFIX_TASKS:
        if not 1 <= spec.k < num_frames:
            raise ValidationError(
                f"boundary k={spec.k} must satisfy 1 <= k < F={num_frames}"
            )
        grid[: spec.k, :] = 1
    elif spec.task in INTERIOR_TASKS:
        if not (1 <= spec.k1 < spec.k2 <= num_frames):
            raise ValidationError(
                f"need 1 <= k1 < k2 <= F, got ({spec.k1}, {spec.k2}) for F={num_frames}"
            )
        grid[:, :] = 1
        grid[spec.k1 : spec.k2, :] = 0
    return BodyPartMask(grid=grid, convention=MaskConvention.VISIBILITY)


class MaskStrategy(enum.Enum):
    PER_PART = "per_part"
    PER_FRAME = "per_frame"
    SPAN = "span"


def random_train_mask(
    source: BodyPartMask,
    p: float,
    strategy: MaskStrategy = MaskStrategy.PER_PART,
    rng_seed: int = 0,
) -> BodyPartMask:
    """Augment a source drop mask with random extra drops.

    The result is always an elementwise superset of ``source`` (cells that
    were already dropped stay dropped), and is a pure function of
    (source, p, strategy, rng_seed).
    """
    if source.convention is not MaskConvention.DROP:
        raise ContractError("random_train_mask expects a Drop-convention mask")
    if not 0.0 <= p <= 1.0:
        raise ValidationError(f"probability must be in [0, 1], got {p}")
    rng = np.random.default_rng(rng_seed)
    grid = source.grid.copy()
    F = grid.shape[0]
    if strategy is MaskStrategy.PER_PART:
        cols = rng.random(NUM_PARTS) < p
        grid[:, cols] = 1
    elif strategy is MaskStrategy.PER_FRAME:
        rows = rng.random(F) < p
        grid[rows, :] = 1
    elif strategy is MaskStrategy.SPAN:
        max_len = int(p * F)
        length = int(rng.integers(0, max_len + 1))
        if length > 0:
            start = int(rng.integers(0, F - length + 1))
            grid[start : start + length, :] = 1
    else:
        raise ValidationError(f"unknown strategy {strategy!r}")
    return BodyPartMask(grid=grid, convention=MaskConvention.DROP)


def loss_weights(source: BodyPartMask) -> np.ndarray:
    """(F, 10) 0/1 weights: supervise everything the source data has.

    Only genuinely missing cells (source drop = 1) are excluded;
    augmentation drops stay supervised so the model learns to infer them.
    """
    if source.convention is not MaskConvention.DROP:
        raise ContractError("loss_weights expects a Drop-convention mask")
    return (1 - source.grid).astype(np.float64)


def visibility_to_drop(mask: BodyPartMask) -> BodyPartMask:
    """Complement of a visibility mask, flipping the convention."""
    if mask.convention is not MaskConvention.VISIBILITY:
        raise ContractError("visibility_to_drop expects a Visibility mask")
    return mask.complement()


def drop_to_visibility(mask: BodyPartMask) -> BodyPartMask:
    """Complement of a drop mask, flipping the convention."""
    if mask.convention is not MaskConvention.DROP:
        raise ContractError("drop_to_visibility expects a Drop mask")
    return mask.complement()


def source_drop_mask(parts_present: np.ndarray, num_frames: int) -> BodyPartMask:
    """Drop mask marking all frames of every absent body part."""
    parts_present = np.asarray(parts_present, dtype=bool)
    if parts_present.shape != (NUM_PARTS,):
        raise DimensionError(f"parts_present must have {NUM_PARTS} flags")
    grid = np.tile((~parts_present).astype(np.uint8), (num_frames, 1))
    return BodyPartMask(grid=grid, convention=MaskConvention.DROP)
