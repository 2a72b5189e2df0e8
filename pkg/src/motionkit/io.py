"""Motion files, synthetic sequences, batch planning, and the translator.

Motion files are line-delimited JSON, one sequence per line, with fields
``fps``, ``dataset``, ``parts_present`` (10 booleans) and ``frames``
(list of 669-float rows). Floats serialize via repr (shortest round-trip
form), so save/load is lossless for every finite float64.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, ParseError, ValidationError
from .kinematics import (
    REST_ROOT_HEIGHT,
    default_skeleton,
    forward_kinematics,
    keypoints_to_unified,
    rest_pose_positions,
    unified_to_keypoints,
)
from .layout import NUM_JOINTS, NUM_PARTS, POSE_DIM, MotionSequence

TRANSLATE_TARGETS = ("unified", "keypoints52")


# -- motion files ------------------------------------------------------------


def save(sequences: list[MotionSequence], path) -> None:
    """Write sequences as JSON lines (one sequence per line)."""
    with open(path, "w", encoding="utf-8") as fh:
        for seq in sequences:
            record = {
                "fps": float(seq.fps),
                "dataset": seq.dataset,
                "parts_present": [bool(v) for v in seq.parts_present],
                "frames": [[float(v) for v in row] for row in seq.data],
            }
            fh.write(json.dumps(record, sort_keys=True) + "\n")


def load(path) -> list[MotionSequence]:
    """Read a motion file; raises ParseError with the offending line."""
    out: list[MotionSequence] = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"invalid JSON ({exc.msg})", line=lineno) from None
            try:
                frames = record["frames"]
                fps = record["fps"]
                dataset = record.get("dataset", "all")
                parts = record.get("parts_present", [True] * NUM_PARTS)
            except (KeyError, TypeError):
                raise ParseError("missing required fields", line=lineno) from None
            for row in frames:
                if len(row) != POSE_DIM:
                    raise DimensionError(
                        f"line {lineno}: frame row has {len(row)} values, "
                        f"expected {POSE_DIM}"
                    )
            try:
                seq = MotionSequence(
                    data=np.array(frames, dtype=np.float64),
                    fps=fps,
                    parts_present=np.array(parts, dtype=bool),
                    dataset=dataset,
                )
            except (ValidationError, ValueError) as exc:
                raise ParseError(str(exc), line=lineno) from None
            out.append(seq)
    return out


def save_keypoints(path, positions: np.ndarray, fps: float, dataset: str = "all") -> None:
    """Write one keypoint trajectory as a single JSON line."""
    positions = np.asarray(positions, dtype=np.float64)
    record = {
        "fps": float(fps),
        "dataset": dataset,
        "positions": [[list(map(float, j)) for j in frame] for frame in positions],
    }
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(record, sort_keys=True) + "\n")


def load_keypoints(path) -> list[tuple[np.ndarray, float, str]]:
    """Read keypoint trajectories: list of (positions (F,52,3), fps, dataset)."""
    out = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"invalid JSON ({exc.msg})", line=lineno) from None
            positions = np.asarray(record.get("positions"), dtype=np.float64)
            if positions.ndim != 3 or positions.shape[1:] != (NUM_JOINTS, 3):
                raise DimensionError(
                    f"line {lineno}: positions must be (F, {NUM_JOINTS}, 3), "
                    f"got {positions.shape}"
                )
            out.append(
                (positions, float(record["fps"]), record.get("dataset", "all"))
            )
    return out


# -- synthetic sequences -----------------------------------------------------

SYNTH_PATTERNS = ("static", "constant_velocity", "sine_walk")

# limbs swung by the sine_walk pattern: (joint, rotation axis sign)
_SWING_JOINTS = ((1, +1.0), (2, -1.0), (16, -1.0), (17, +1.0))


def synth_motion(
    pattern: str,
    num_frames: int,
    fps: float,
    seed: int = 0,
    step: float = 0.1,
) -> MotionSequence:
    """Generate a synthetic sequence whose representation invariants hold
    by construction (velocities come from keypoints_to_unified).

    Patterns: ``static`` repeats the rest pose; ``constant_velocity``
    advances the root ``step`` meters per frame along world X;
    ``sine_walk`` swings hips and shoulders sinusoidally with a 1 s
    period (amplitude/phase jitter drawn from ``seed``), moving forward.
    The trajectory is a function of real time, so the same seed at
    different frame rates samples the same underlying motion.
    """
    if num_frames < 2:
        raise ValidationError(f"need at least 2 frames, got {num_frames}")
    if pattern not in SYNTH_PATTERNS:
        raise ValidationError(
            f"unknown pattern {pattern!r}; choose from {SYNTH_PATTERNS}"
        )
    skel = default_skeleton()
    rest = rest_pose_positions(skel)
    times = np.arange(num_frames) / fps

    if pattern == "static":
        positions = np.repeat(rest[None], num_frames, axis=0)
        return keypoints_to_unified(positions, fps, dataset="synth")

    if pattern == "constant_velocity":
        positions = np.repeat(rest[None], num_frames, axis=0).copy()
        positions[:, :, 0] += (step * np.arange(num_frames))[:, None]
        return keypoints_to_unified(positions, fps, dataset="synth")

    rng = np.random.default_rng(seed)
    amp = 0.35 + 0.15 * rng.random()
    phases = rng.uniform(0.0, 2.0 * np.pi, size=len(_SWING_JOINTS))
    speed = 0.5 + 0.5 * rng.random()  # m/s forward along Z
    rotations = np.broadcast_to(
        np.eye(3), (num_frames, NUM_JOINTS, 3, 3)
    ).copy()
    for idx, (joint, sign) in enumerate(_SWING_JOINTS):
        angles = sign * amp * np.sin(2.0 * np.pi * times + phases[idx])
        c, s = np.cos(angles), np.sin(angles)
        # swing about the X axis (sagittal plane)
        rotations[:, joint, 1, 1] = c
        rotations[:, joint, 1, 2] = -s
        rotations[:, joint, 2, 1] = s
        rotations[:, joint, 2, 2] = c
    positions = np.empty((num_frames, NUM_JOINTS, 3))
    for f in range(num_frames):
        root = np.array([0.0, REST_ROOT_HEIGHT, speed * times[f]])
        positions[f] = forward_kinematics(skel, root, rotations[f])
    return keypoints_to_unified(positions, fps, rotations=rotations, dataset="synth")


# -- batch planning ------------------------------------------------------------

# sampling weights per source dataset, grouped by task
DEFAULT_DATASET_WEIGHTS: dict[str, float] = {
    # text-to-motion, 40% total
    "humanml3d": 0.15,
    "motionx": 0.15,
    "kitml": 0.05,
    "babel": 0.05,
    # unconditional, 25%
    "amass": 0.25,
    # action-to-motion, 10% split evenly
    "humanact12": 0.10 / 3,
    "uestc": 0.10 / 3,
    "ntu_rgbd_120": 0.10 / 3,
    # speech-to-gesture, 10%: half to the held-out-style corpus, rest even
    "beat": 0.05,
    "ted_gesture": 0.05 / 3,
    "ted_expressive": 0.05 / 3,
    "speech2gesture_3d": 0.05 / 3,
    # music-to-dance, 5%
    "aistpp": 0.05,
    # motion imitation, 10% split evenly
    "mpi_inf_3dhp": 0.05,
    "human36m": 0.05,
}

DATASET_TASKS: dict[str, str] = {
    "humanml3d": "t2m",
    "motionx": "t2m",
    "kitml": "t2m",
    "babel": "t2m",
    "amass": "uncond",
    "humanact12": "a2m",
    "uestc": "a2m",
    "ntu_rgbd_120": "a2m",
    "beat": "s2g",
    "ted_gesture": "s2g",
    "ted_expressive": "s2g",
    "speech2gesture_3d": "s2g",
    "aistpp": "m2d",
    "mpi_inf_3dhp": "mim",
    "human36m": "mim",
}


@dataclass
class BatchPlanConfig:
    """Dataset sampling weights plus the generic-id replacement rate."""

    weights: dict[str, float] = field(
        default_factory=lambda: dict(DEFAULT_DATASET_WEIGHTS)
    )
    all_replace_prob: float = 0.10

    def __post_init__(self):
        if not self.weights:
            raise ValidationError("batch plan needs at least one dataset weight")
        values = np.array(list(self.weights.values()), dtype=np.float64)
        if np.any(values < 0) or values.sum() <= 0:
            raise ValidationError("weights must be nonnegative with positive sum")
        if not 0.0 <= self.all_replace_prob <= 1.0:
            raise ValidationError("all_replace_prob must be in [0, 1]")


def batch_plan(
    config: BatchPlanConfig, n: int, rng_seed: int = 0
) -> list[tuple[str, str]]:
    """Draw n (dataset, effective dataset) pairs.

    Tags are drawn proportionally to the normalized weights; each draw is
    then independently replaced by the generic id "all" with the
    configured probability (the source tag is kept in the pair).
    """
    if n < 1:
        raise ValidationError(f"n must be >= 1, got {n}")
    rng = np.random.default_rng(rng_seed)
    tags = sorted(config.weights)
    probs = np.array([config.weights[t] for t in tags], dtype=np.float64)
    probs = probs / probs.sum()
    draws = rng.choice(len(tags), size=n, p=probs)
    replace = rng.random(n) < config.all_replace_prob
    return [
        (tags[d], "all" if r else tags[d]) for d, r in zip(draws, replace)
    ]


# -- representation translator -------------------------------------------------


def translate(seq: MotionSequence, target: str):
    """Convert a unified sequence to a foreign representation.

    ``unified`` is the identity; ``keypoints52`` deterministically rebuilds
    the 52-joint world trajectory from the root track and the relative
    positions. Learned per-dataset translators are external: anything
    callable mapping MotionSequence to the target format can stand in.
    """
    if target == "unified":
        return seq
    if target == "keypoints52":
        return unified_to_keypoints(seq)
    raise ValidationError(
        f"unsupported target {target!r}; choose from {TRANSLATE_TARGETS}"
    )
