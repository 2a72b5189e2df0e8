import numpy as np
import pytest

from motionkit.errors import DimensionError, ValidationError
from motionkit.layout import (
    PART_NAMES,
    PART_SIZES,
    POSE_DIM,
    MotionSequence,
    UnifiedFrame,
    canonical_layout,
    pack,
    unpack,
)


def test_layout_covers_669():
    layout = canonical_layout()
    assert sum(layout.size(name) for name in PART_NAMES) == POSE_DIM


def test_global_part_size_is_seven():
    # 4 root scalars + the root joint's 3 velocity dims
    layout = canonical_layout()
    assert layout.size("global") == 7
    assert layout.ranges["global"] == ((0, 4), (157, 160))


def test_face_occupies_trailing_50():
    layout = canonical_layout()
    assert layout.ranges["face"] == ((619, 669),)


def test_part_sizes_match_table():
    layout = canonical_layout()
    for name in PART_NAMES:
        assert layout.size(name) == PART_SIZES[name]


def test_partition_disjoint_and_exhaustive():
    layout = canonical_layout()
    counts = np.zeros(POSE_DIM, dtype=int)
    for name in PART_NAMES:
        counts[layout.indices(name)] += 1
    assert np.all(counts == 1)


def test_part_of_round_trips():
    layout = canonical_layout()
    for idx in (0, 3, 4, 157, 160, 313, 618, 619, 668):
        name = layout.part_of(idx)
        assert idx in layout.indices(name)


def test_pack_zero_frame():
    assert np.array_equal(pack(UnifiedFrame()), np.zeros(POSE_DIM))


def test_pack_unpack_round_trip_bitwise():
    rng = np.random.default_rng(11)
    for _ in range(50):
        vec = rng.standard_normal(POSE_DIM)
        assert np.array_equal(pack(unpack(vec)), vec)
        frame = unpack(vec)
        back = unpack(pack(frame))
        assert back.root_angular_vel == frame.root_angular_vel
        assert np.array_equal(back.joint_rot, frame.joint_rot)
        assert np.array_equal(back.face, frame.face)


def test_root_height_lands_at_index_3():
    frame = UnifiedFrame(root_height=1.0)
    assert pack(frame)[3] == 1.0


def test_unpack_rejects_wrong_length():
    with pytest.raises(DimensionError):
        unpack(np.zeros(POSE_DIM - 1))


def test_sequence_validation():
    data = np.zeros((4, POSE_DIM))
    seq = MotionSequence(data=data, fps=30.0)
    assert seq.num_frames == 4
    with pytest.raises(ValidationError):
        MotionSequence(data=np.zeros((0, POSE_DIM)), fps=30.0)
    with pytest.raises(ValidationError):
        MotionSequence(data=data, fps=0.0)
    with pytest.raises(DimensionError):
        MotionSequence(data=data, fps=30.0, parts_present=np.ones(9, dtype=bool))
    with pytest.raises(DimensionError):
        MotionSequence(data=np.zeros((4, POSE_DIM + 1)), fps=30.0)


def test_sequence_frame_views():
    rng = np.random.default_rng(5)
    data = rng.standard_normal((3, POSE_DIM))
    seq = MotionSequence(data=data, fps=24.0)
    rebuilt = MotionSequence.from_frames(seq.frames, fps=24.0)
    assert np.array_equal(rebuilt.data, data)
