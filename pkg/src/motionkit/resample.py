"""Integer-factor frame-rate downsampling with velocity recomputation.

State channels (height, joint positions, rotations, face) are copied from
the kept frames unchanged; velocity channels are rebuilt as differences of
the underlying world-space states between consecutive kept frames, so the
result is exactly what a direct conversion at the lower rate would give.
"""

from __future__ import annotations

import numpy as np

from .errors import ValidationError
from .kinematics import _rotate_xz, integrate_root_track, unified_to_keypoints
from .layout import JOINT_ROT_OFF, JOINT_VEL_OFF, MotionSequence


def resample(seq: MotionSequence, factor: int) -> MotionSequence:
    """Keep every ``factor``-th frame and divide fps accordingly."""
    if factor < 1:
        raise ValidationError(f"factor must be >= 1, got {factor}")
    if factor == 1:
        return seq.copy()
    F = seq.num_frames
    if F <= factor:
        raise ValidationError(
            f"cannot resample {F} frames by factor {factor}; need F > factor"
        )

    kept = np.arange(0, F, factor)
    K = kept.shape[0]
    yaw, root = integrate_root_track(seq)
    world = unified_to_keypoints(seq)

    out = seq.copy()
    out.data = seq.data[kept].copy()
    out.fps = seq.fps / factor

    # pairs of consecutive kept frames; the last kept frame repeats
    a = kept[:-1]
    b = kept[1:]
    out.data[:-1, 0] = yaw[b] - yaw[a]
    droot = root[b] - root[a]
    vx, vz = _rotate_xz(droot[:, 0], droot[:, 2], -yaw[a])
    out.data[:-1, 1] = vx
    out.data[:-1, 2] = vz
    dj = world[b] - world[a]
    jx, jz = _rotate_xz(dj[..., 0], dj[..., 2], -yaw[a, None])
    jvel = np.stack([jx, dj[..., 1], jz], axis=-1)
    out.data[:-1, JOINT_VEL_OFF:JOINT_ROT_OFF] = jvel.reshape(K - 1, -1)
    out.data[-1, 0:3] = out.data[-2, 0:3]
    out.data[-1, JOINT_VEL_OFF:JOINT_ROT_OFF] = out.data[-2, JOINT_VEL_OFF:JOINT_ROT_OFF]
    return out
