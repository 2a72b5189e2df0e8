"""The unified 669-dim pose vector: field offsets and the ten-part split.

Per-frame vector layout (669 floats):

    [0]         root yaw angular velocity, rad/frame
    [1:3]       root linear velocity on XZ, m/frame, in the root-yaw frame
    [3]         root height, m
    [4:157]     joint positions, joints 1..51, root-relative, yaw-aligned (3 each)
    [157:313]   joint velocities, joints 0..51, m/frame, yaw-aligned (3 each)
    [313:619]   joint rotations, joints 1..51, 6D (first two matrix columns)
    [619:669]   facial expression coefficients

Velocities are per-frame displacements; the sequence's fps is carried
separately so resampling stays a pure frame-difference operation.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np

from .errors import DimensionError, ValidationError

NUM_JOINTS = 52          # SMPL-X: 22 body + 30 hand joints
POSE_DIM = 669
NUM_PARTS = 10
FACE_DIM = 50

# field offsets into the 669-vector
ROOT_OFF = 0             # 4 scalars: yaw vel, x vel, z vel, height
JOINT_POS_OFF = 4        # 3 * 51
JOINT_VEL_OFF = 157      # 3 * 52
JOINT_ROT_OFF = 313      # 6 * 51
FACE_OFF = 619

PART_NAMES = (
    "global",
    "face",
    "head",
    "spine",
    "left_arm",
    "right_arm",
    "left_leg",
    "right_leg",
    "left_hand",
    "right_hand",
)

# SMPL-X body grouping; joint 0 (pelvis) belongs to the global part.
PART_JOINTS = {
    "spine": (3, 6, 9),
    "head": (12, 15),
    "left_arm": (13, 16, 18, 20),
    "right_arm": (14, 17, 19, 21),
    "left_leg": (1, 4, 7, 10),
    "right_leg": (2, 5, 8, 11),
    "left_hand": tuple(range(22, 37)),
    "right_hand": tuple(range(37, 52)),
}

PART_SIZES = {
    "global": 7,
    "face": 50,
    "head": 24,
    "spine": 36,
    "left_arm": 48,
    "right_arm": 48,
    "left_leg": 48,
    "right_leg": 48,
    "left_hand": 180,
    "right_hand": 180,
}


def joint_pos_slice(joint: int) -> slice:
    """Index range of joint's position block (joints 1..51)."""
    if not 1 <= joint < NUM_JOINTS:
        raise ValidationError(f"position block exists for joints 1..51, got {joint}")
    return slice(JOINT_POS_OFF + 3 * (joint - 1), JOINT_POS_OFF + 3 * joint)


def joint_vel_slice(joint: int) -> slice:
    """Index range of joint's velocity block (joints 0..51)."""
    if not 0 <= joint < NUM_JOINTS:
        raise ValidationError(f"velocity block exists for joints 0..51, got {joint}")
    return slice(JOINT_VEL_OFF + 3 * joint, JOINT_VEL_OFF + 3 * (joint + 1))


def joint_rot_slice(joint: int) -> slice:
    """Index range of joint's 6D rotation block (joints 1..51)."""
    if not 1 <= joint < NUM_JOINTS:
        raise ValidationError(f"rotation block exists for joints 1..51, got {joint}")
    return slice(JOINT_ROT_OFF + 6 * (joint - 1), JOINT_ROT_OFF + 6 * joint)


@dataclass(frozen=True)
class PartLayout:
    """Mapping from the 10 body parts to disjoint index ranges of the vector.

    ``ranges[name]`` is a tuple of half-open ``(start, stop)`` pairs. The
    union of all ranges covers 0..668 exactly once.
    """

    ranges: dict[str, tuple[tuple[int, int], ...]]

    def indices(self, part: str) -> np.ndarray:
        """All vector indices belonging to ``part``, ascending."""
        return np.concatenate(
            [np.arange(a, b) for a, b in self.ranges[part]]
        ).astype(np.intp)

    def size(self, part: str) -> int:
        return sum(b - a for a, b in self.ranges[part])

    def part_of(self, index: int) -> str:
        """Name of the part owning a vector index."""
        for name, spans in self.ranges.items():
            for a, b in spans:
                if a <= index < b:
                    return name
        raise ValidationError(f"index {index} outside [0, {POSE_DIM})")

    def feature_matrix(self) -> np.ndarray:
        """(10, 669) boolean membership matrix, row order = PART_NAMES."""
        m = np.zeros((NUM_PARTS, POSE_DIM), dtype=bool)
        for i, name in enumerate(PART_NAMES):
            m[i, self.indices(name)] = True
        return m


def _merge_spans(indices: Iterable[int]) -> tuple[tuple[int, int], ...]:
    """Collapse sorted indices into half-open contiguous spans."""
    spans: list[list[int]] = []
    for i in sorted(indices):
        if spans and spans[-1][1] == i:
            spans[-1][1] = i + 1
        else:
            spans.append([i, i + 1])
    return tuple((a, b) for a, b in spans)


def canonical_layout() -> PartLayout:
    """The fixed ten-part partition of the 669-dim vector."""
    ranges: dict[str, tuple[tuple[int, int], ...]] = {}
    # root scalars plus the root joint's velocity block
    global_idx = list(range(0, 4)) + list(range(JOINT_VEL_OFF, JOINT_VEL_OFF + 3))
    ranges["global"] = _merge_spans(global_idx)
    ranges["face"] = ((FACE_OFF, POSE_DIM),)
    for name, joints in PART_JOINTS.items():
        idx: list[int] = []
        for j in joints:
            s = joint_pos_slice(j)
            idx.extend(range(s.start, s.stop))
            s = joint_vel_slice(j)
            idx.extend(range(s.start, s.stop))
            s = joint_rot_slice(j)
            idx.extend(range(s.start, s.stop))
        ranges[name] = _merge_spans(idx)
    return PartLayout(ranges={name: ranges[name] for name in PART_NAMES})


@dataclass
class UnifiedFrame:
    """One frame of the unified pose representation."""

    root_angular_vel: float = 0.0
    root_lin_vel_x: float = 0.0
    root_lin_vel_z: float = 0.0
    root_height: float = 0.0
    joint_pos: np.ndarray = field(default_factory=lambda: np.zeros(153))
    joint_vel: np.ndarray = field(default_factory=lambda: np.zeros(156))
    joint_rot: np.ndarray = field(default_factory=lambda: np.zeros(306))
    face: np.ndarray = field(default_factory=lambda: np.zeros(FACE_DIM))

    def __post_init__(self):
        self.joint_pos = np.asarray(self.joint_pos, dtype=np.float64)
        self.joint_vel = np.asarray(self.joint_vel, dtype=np.float64)
        self.joint_rot = np.asarray(self.joint_rot, dtype=np.float64)
        self.face = np.asarray(self.face, dtype=np.float64)
        for name, arr, want in (
            ("joint_pos", self.joint_pos, 153),
            ("joint_vel", self.joint_vel, 156),
            ("joint_rot", self.joint_rot, 306),
            ("face", self.face, FACE_DIM),
        ):
            if arr.shape != (want,):
                raise DimensionError(f"{name} must have shape ({want},), got {arr.shape}")


def pack(frame: UnifiedFrame) -> np.ndarray:
    """Flatten a frame into its 669-float vector."""
    out = np.empty(POSE_DIM)
    out[0] = frame.root_angular_vel
    out[1] = frame.root_lin_vel_x
    out[2] = frame.root_lin_vel_z
    out[3] = frame.root_height
    out[JOINT_POS_OFF:JOINT_VEL_OFF] = frame.joint_pos
    out[JOINT_VEL_OFF:JOINT_ROT_OFF] = frame.joint_vel
    out[JOINT_ROT_OFF:FACE_OFF] = frame.joint_rot
    out[FACE_OFF:] = frame.face
    return out


def unpack(vector: np.ndarray) -> UnifiedFrame:
    """Inverse of :func:`pack`; bitwise round-trip."""
    v = np.asarray(vector, dtype=np.float64)
    if v.shape != (POSE_DIM,):
        raise DimensionError(f"expected a ({POSE_DIM},) vector, got {v.shape}")
    return UnifiedFrame(
        root_angular_vel=float(v[0]),
        root_lin_vel_x=float(v[1]),
        root_lin_vel_z=float(v[2]),
        root_height=float(v[3]),
        joint_pos=v[JOINT_POS_OFF:JOINT_VEL_OFF].copy(),
        joint_vel=v[JOINT_VEL_OFF:JOINT_ROT_OFF].copy(),
        joint_rot=v[JOINT_ROT_OFF:FACE_OFF].copy(),
        face=v[FACE_OFF:].copy(),
    )


# identity rotation in the 6D encoding: first two columns of I
IDENTITY_ROT6D = np.array([1.0, 0.0, 0.0, 0.0, 1.0, 0.0])

# channels holding per-frame differences (recomputed on resampling)
VELOCITY_INDICES = np.concatenate(
    [np.arange(0, 3), np.arange(JOINT_VEL_OFF, JOINT_ROT_OFF)]
).astype(np.intp)

STATE_INDICES = np.setdiff1d(np.arange(POSE_DIM), VELOCITY_INDICES).astype(np.intp)


@dataclass
class MotionSequence:
    """F frames of the unified representation plus sequence metadata.

    ``data`` is an (F, 669) float array; ``parts_present`` has one flag per
    body part in PART_NAMES order. ``meta`` carries free-form annotations
    (e.g. whether rotations came from a solver) and is not serialized.
    """

    data: np.ndarray
    fps: float
    parts_present: np.ndarray = field(
        default_factory=lambda: np.ones(NUM_PARTS, dtype=bool)
    )
    dataset: str = "all"
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=np.float64)
        self.parts_present = np.asarray(self.parts_present, dtype=bool)
        if self.data.ndim != 2 or self.data.shape[1] != POSE_DIM:
            raise DimensionError(
                f"data must be (F, {POSE_DIM}), got {self.data.shape}"
            )
        if self.data.shape[0] < 1:
            raise ValidationError("a sequence needs at least one frame")
        if not self.fps > 0:
            raise ValidationError(f"fps must be positive, got {self.fps}")
        if self.parts_present.shape != (NUM_PARTS,):
            raise DimensionError(
                f"parts_present needs exactly {NUM_PARTS} flags, "
                f"got {self.parts_present.shape}"
            )

    @property
    def num_frames(self) -> int:
        return self.data.shape[0]

    def frame(self, i: int) -> UnifiedFrame:
        return unpack(self.data[i])

    @property
    def frames(self) -> list[UnifiedFrame]:
        return [self.frame(i) for i in range(self.num_frames)]

    @classmethod
    def from_frames(
        cls,
        frames: Sequence[UnifiedFrame],
        fps: float,
        parts_present=None,
        dataset: str = "all",
    ) -> "MotionSequence":
        data = np.stack([pack(f) for f in frames])
        if parts_present is None:
            parts_present = np.ones(NUM_PARTS, dtype=bool)
        return cls(data=data, fps=fps, parts_present=parts_present, dataset=dataset)

    def copy(self) -> "MotionSequence":
        return replace(
            self,
            data=self.data.copy(),
            parts_present=self.parts_present.copy(),
            meta=dict(self.meta),
        )

    def times(self) -> np.ndarray:
        """Real-time position of each frame in seconds."""
        return np.arange(self.num_frames, dtype=np.float64) / self.fps
