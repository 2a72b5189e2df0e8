"""Skeleton model, forward kinematics, and keypoint-to-unified conversion.

Coordinate conventions: Y is up, the rest pose faces +Z with the left side
of the body toward +X. Yaw is the rotation about Y with yaw 0 = facing +Z.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import DimensionError, ValidationError
from .layout import (
    FACE_OFF,
    IDENTITY_ROT6D,
    JOINT_POS_OFF,
    JOINT_ROT_OFF,
    JOINT_VEL_OFF,
    NUM_JOINTS,
    PART_NAMES,
    POSE_DIM,
    MotionSequence,
    canonical_layout,
)
from .rotations import matrix_to_rot6d, wrap_angle

REST_ROOT_HEIGHT = 0.95

_ROOT_SENTINEL = -1


@dataclass(frozen=True)
class Skeleton:
    """Joint hierarchy with parent-relative rest offsets (meters).

    ``parents[0]`` is -1; every other joint's parent index is smaller than
    its own, so a single forward pass resolves the chain.
    """

    parents: np.ndarray
    offsets: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "parents", np.asarray(self.parents, dtype=np.intp))
        object.__setattr__(self, "offsets", np.asarray(self.offsets, dtype=np.float64))
        n = self.parents.shape[0]
        if self.offsets.shape != (n, 3):
            raise DimensionError(
                f"offsets must be ({n}, 3), got {self.offsets.shape}"
            )
        if self.parents[0] != _ROOT_SENTINEL:
            raise ValidationError("joint 0 must be the root (parent -1)")
        if np.any(self.parents[1:] >= np.arange(1, n)):
            raise ValidationError("parents must be topologically ordered")

    @property
    def num_joints(self) -> int:
        return self.parents.shape[0]


# SMPL-X body order for joints 0..21, then 15 left-hand and 15 right-hand
# joints (index/middle/pinky/ring/thumb, three segments each).
_BODY_PARENTS = [
    _ROOT_SENTINEL, 0, 0, 0, 1, 2, 3, 4, 5, 6, 7, 8,
    9, 9, 9, 12, 13, 14, 16, 17, 18, 19,
]

_BODY_OFFSETS = [
    (0.000, 0.000, 0.000),    # pelvis (root; offset unused)
    (+0.090, -0.070, 0.000),  # left hip
    (-0.090, -0.070, 0.000),  # right hip
    (0.000, +0.110, 0.000),   # spine1
    (0.000, -0.380, 0.000),   # left knee
    (0.000, -0.380, 0.000),   # right knee
    (0.000, +0.130, 0.000),   # spine2
    (0.000, -0.400, 0.000),   # left ankle
    (0.000, -0.400, 0.000),   # right ankle
    (0.000, +0.060, 0.000),   # spine3
    (0.000, -0.060, +0.130),  # left foot
    (-0.000, -0.060, +0.130), # right foot
    (0.000, +0.210, 0.000),   # neck
    (+0.060, +0.170, 0.000),  # left collar
    (-0.060, +0.170, 0.000),  # right collar
    (0.000, +0.120, 0.000),   # head
    (+0.100, 0.000, 0.000),   # left shoulder
    (-0.100, 0.000, 0.000),   # right shoulder
    (+0.260, 0.000, 0.000),   # left elbow
    (-0.260, 0.000, 0.000),   # right elbow
    (+0.250, 0.000, 0.000),   # left wrist
    (-0.250, 0.000, 0.000),   # right wrist
]

# one finger = (base offset from wrist, segment 2 offset, segment 3 offset)
_LEFT_FINGERS = [
    ((+0.090, 0.000, +0.020), (+0.030, 0.000, 0.000), (+0.020, 0.000, 0.000)),
    ((+0.095, 0.000, 0.000), (+0.030, 0.000, 0.000), (+0.020, 0.000, 0.000)),
    ((+0.085, 0.000, -0.035), (+0.025, 0.000, 0.000), (+0.018, 0.000, 0.000)),
    ((+0.090, 0.000, -0.020), (+0.028, 0.000, 0.000), (+0.020, 0.000, 0.000)),
    ((+0.030, 0.000, +0.035), (+0.035, 0.000, +0.010), (+0.025, 0.000, +0.010)),
]


def default_skeleton() -> Skeleton:
    """52-joint humanoid with SMPL-X ordering and plausible rest offsets."""
    parents = list(_BODY_PARENTS)
    offsets = [list(o) for o in _BODY_OFFSETS]
    for wrist, sign in ((20, +1.0), (21, -1.0)):
        for base, seg2, seg3 in _LEFT_FINGERS:
            first = len(parents)
            parents.extend([wrist, first, first + 1])
            for off in (base, seg2, seg3):
                offsets.append([sign * off[0], off[1], off[2]])
    return Skeleton(parents=np.array(parents), offsets=np.array(offsets))


def forward_kinematics(
    skeleton: Skeleton, root_pos: np.ndarray, rotations: np.ndarray
) -> np.ndarray:
    """Resolve world joint positions from local rotations.

    rotations: (J, 3, 3) local rotation per joint (index 0 = root
    orientation). Returns (J, 3) positions with
    ``pos[i] = pos[parent] + R_global[parent] @ offset[i]``.
    """
    root_pos = np.asarray(root_pos, dtype=np.float64)
    rotations = np.asarray(rotations, dtype=np.float64)
    n = skeleton.num_joints
    if rotations.shape != (n, 3, 3):
        raise DimensionError(f"rotations must be ({n}, 3, 3), got {rotations.shape}")
    if root_pos.shape != (3,):
        raise DimensionError(f"root_pos must be (3,), got {root_pos.shape}")
    pos = np.empty((n, 3))
    glob = np.empty((n, 3, 3))
    pos[0] = root_pos
    glob[0] = rotations[0]
    for i in range(1, n):
        p = skeleton.parents[i]
        pos[i] = pos[p] + glob[p] @ skeleton.offsets[i]
        glob[i] = glob[p] @ rotations[i]
    return pos


def rest_pose_positions(skeleton: Optional[Skeleton] = None) -> np.ndarray:
    """World joint positions of the rest pose (identity rotations)."""
    skel = skeleton if skeleton is not None else default_skeleton()
    eye = np.broadcast_to(np.eye(3), (skel.num_joints, 3, 3))
    root = np.array([0.0, REST_ROOT_HEIGHT, 0.0])
    return forward_kinematics(skel, root, eye)


def yaw_from_keypoints(positions: np.ndarray) -> np.ndarray:
    """Per-frame root yaw estimated from the hip line.

    positions: (F, 52, 3). The facing direction is cross(left_hip -
    right_hip, up); yaw 0 means facing +Z.
    """
    across = positions[:, 1, :] - positions[:, 2, :]
    fwd_x = -across[:, 2]
    fwd_z = across[:, 0]
    norm = np.hypot(fwd_x, fwd_z)
    if np.any(norm < 1e-12):
        raise ValidationError("hip joints coincide; yaw is undefined")
    return np.arctan2(fwd_x, fwd_z)


def _rotate_xz(x, z, angle):
    """Apply R_y(angle) to XZ pairs (elementwise)."""
    c, s = np.cos(angle), np.sin(angle)
    return c * x + s * z, -s * x + c * z


def keypoints_to_unified(
    positions: np.ndarray,
    fps: float,
    rotations: Optional[np.ndarray] = None,
    ik_solver: Optional[Callable[[np.ndarray], np.ndarray]] = None,
    parts_present: Optional[np.ndarray] = None,
    dataset: str = "all",
) -> MotionSequence:
    """Convert an (F, 52, 3) keypoint trajectory to the unified format.

    Velocity channels hold the displacement to the *next* frame, expressed
    in the current frame's yaw-aligned root frame; the final frame repeats
    the previous frame's velocities. Joint rotations come from
    ``rotations`` (F, 52, 3, 3) if given, else from ``ik_solver`` applied
    to the positions, else identity (the choice is recorded in ``meta``).
    """
    positions = np.asarray(positions, dtype=np.float64)
    if positions.ndim != 3 or positions.shape[1:] != (NUM_JOINTS, 3):
        raise DimensionError(
            f"positions must be (F, {NUM_JOINTS}, 3), got {positions.shape}"
        )
    if np.any(~np.isfinite(positions)):
        raise ValidationError("positions contain NaN or infinite values")
    F = positions.shape[0]

    rot_source = "given"
    if rotations is None and ik_solver is not None:
        rotations = ik_solver(positions)
        rot_source = "ik_solver"
    if rotations is None:
        rot_source = "identity"
    else:
        rotations = np.asarray(rotations, dtype=np.float64)
        if rotations.shape != (F, NUM_JOINTS, 3, 3):
            raise DimensionError(f"rotations must be ({F}, {NUM_JOINTS}, 3, 3)")

    yaw = yaw_from_keypoints(positions)
    root = positions[:, 0, :]

    data = np.zeros((F, POSE_DIM))
    data[:, 3] = root[:, 1]

    # root-relative, yaw-aligned joint positions
    rel = positions[:, 1:, :] - root[:, None, :]
    rx, rz = _rotate_xz(rel[..., 0], rel[..., 2], -yaw[:, None])
    local = np.stack([rx, rel[..., 1], rz], axis=-1)
    data[:, JOINT_POS_OFF:JOINT_VEL_OFF] = local.reshape(F, -1)

    if rotations is not None:
        r6 = matrix_to_rot6d(rotations[:, 1:, :, :])
        data[:, JOINT_ROT_OFF:FACE_OFF] = r6.reshape(F, -1)
    else:
        data[:, JOINT_ROT_OFF:FACE_OFF] = np.tile(IDENTITY_ROT6D, NUM_JOINTS - 1)

    if F >= 2:
        dyaw = wrap_angle(yaw[1:] - yaw[:-1])
        data[:-1, 0] = dyaw
        droot = root[1:] - root[:-1]
        vx, vz = _rotate_xz(droot[:, 0], droot[:, 2], -yaw[:-1])
        data[:-1, 1] = vx
        data[:-1, 2] = vz
        dj = positions[1:] - positions[:-1]
        jx, jz = _rotate_xz(dj[..., 0], dj[..., 2], -yaw[:-1, None])
        jvel = np.stack([jx, dj[..., 1], jz], axis=-1)
        data[:-1, JOINT_VEL_OFF:JOINT_ROT_OFF] = jvel.reshape(F - 1, -1)
        data[-1, 0:3] = data[-2, 0:3]
        data[-1, JOINT_VEL_OFF:JOINT_ROT_OFF] = data[-2, JOINT_VEL_OFF:JOINT_ROT_OFF]

    if parts_present is None:
        parts_present = np.ones(len(PART_NAMES), dtype=bool)
        parts_present[PART_NAMES.index("face")] = False  # keypoints carry no face

    return MotionSequence(
        data=data,
        fps=fps,
        parts_present=parts_present,
        dataset=dataset,
        meta={"rotations": rot_source},
    )


def integrate_root_track(seq: MotionSequence) -> tuple[np.ndarray, np.ndarray]:
    """Recover per-frame yaw and world root position by integrating velocities.

    The representation stores no absolute heading or XZ position, so the
    track starts at yaw 0 and XZ origin; any rigid offset of the original
    trajectory is unrecoverable (and irrelevant to velocities).

    Returns (yaw (F,), root (F, 3)).
    """
    F = seq.num_frames
    yaw = np.zeros(F)
    root = np.zeros((F, 3))
    root[:, 1] = seq.data[:, 3]
    # the stored last-frame velocity is a copy, never integrated
    if F >= 2:
        yaw[1:] = np.cumsum(seq.data[:-1, 0])
        c, s = np.cos(yaw[:-1]), np.sin(yaw[:-1])
        lx, lz = seq.data[:-1, 1], seq.data[:-1, 2]
        root[1:, 0] = np.cumsum(c * lx + s * lz)
        root[1:, 2] = np.cumsum(-s * lx + c * lz)
    return yaw, root


def unified_to_keypoints(seq: MotionSequence) -> np.ndarray:
    """Rebuild (F, 52, 3) world keypoints from the position channels.

    Inverse of the position pathway of :func:`keypoints_to_unified`, up to
    the original trajectory's absolute XZ position and heading.
    """
    yaw, root = integrate_root_track(seq)
    F = seq.num_frames
    local = seq.data[:, JOINT_POS_OFF:JOINT_VEL_OFF].reshape(F, NUM_JOINTS - 1, 3)
    wx, wz = _rotate_xz(local[..., 0], local[..., 2], yaw[:, None])
    out = np.empty((F, NUM_JOINTS, 3))
    out[:, 0, :] = root
    out[:, 1:, 0] = wx + root[:, None, 0]
    out[:, 1:, 1] = local[..., 1] + root[:, None, 1]
    out[:, 1:, 2] = wz + root[:, None, 2]
    return out


def rest_pose_vector() -> np.ndarray:
    """The 669-vector of the rest pose: zero velocities, identity rotations."""
    rest = rest_pose_positions()
    vec = np.zeros(POSE_DIM)
    vec[3] = REST_ROOT_HEIGHT
    vec[JOINT_POS_OFF:JOINT_VEL_OFF] = (rest[1:] - rest[0]).reshape(-1)
    vec[JOINT_ROT_OFF:FACE_OFF] = np.tile(IDENTITY_ROT6D, NUM_JOINTS - 1)
    return vec


def complete_missing_parts(seq: MotionSequence) -> MotionSequence:
    """Fill absent body parts with rest-pose defaults.

    Present parts are untouched (bitwise) and the presence flags are
    preserved; the fill only makes the vector well-formed everywhere.
    """
    out = seq.copy()
    part_layout = canonical_layout()
    rest = rest_pose_vector()
    for i, name in enumerate(PART_NAMES):
        if not seq.parts_present[i]:
            idx = part_layout.indices(name)
            out.data[:, idx] = rest[idx]
    return out
