import numpy as np
import pytest

from motionkit.errors import DimensionError, ParseError, ValidationError
from motionkit.io import (
    DATASET_TASKS,
    DEFAULT_DATASET_WEIGHTS,
    BatchPlanConfig,
    batch_plan,
    load,
    load_keypoints,
    save,
    save_keypoints,
    synth_motion,
    translate,
)
from motionkit.kinematics import keypoints_to_unified
from motionkit.layout import POSE_DIM, STATE_INDICES, MotionSequence
from motionkit.resample import resample


def random_sequence(rng, frames=5):
    return MotionSequence(
        data=rng.standard_normal((frames, POSE_DIM)),
        fps=25.0,
        parts_present=rng.random(10) < 0.8,
        dataset="demo",
    )


def test_save_load_round_trip(tmp_path):
    rng = np.random.default_rng(0)
    seqs = [random_sequence(rng, frames=f) for f in (1, 4, 9)]
    path = tmp_path / "motions.jsonl"
    save(seqs, path)
    loaded = load(path)
    assert len(loaded) == 3
    for a, b in zip(seqs, loaded):
        assert np.array_equal(a.data, b.data)
        assert a.fps == b.fps
        assert np.array_equal(a.parts_present, b.parts_present)
        assert a.dataset == b.dataset


def test_save_is_deterministic(tmp_path):
    rng = np.random.default_rng(1)
    seqs = [random_sequence(rng)]
    p1, p2 = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    save(seqs, p1)
    save(seqs, p2)
    assert p1.read_bytes() == p2.read_bytes()


def test_load_empty_file(tmp_path):
    path = tmp_path / "empty.jsonl"
    path.write_text("")
    assert load(path) == []


def test_load_reports_line_for_bad_row_width(tmp_path):
    rng = np.random.default_rng(2)
    path = tmp_path / "bad.jsonl"
    save([random_sequence(rng)], path)
    record = {
        "fps": 30.0,
        "dataset": "x",
        "parts_present": [True] * 10,
        "frames": [[0.0] * (POSE_DIM - 1)],
    }
    import json

    with open(path, "a") as fh:
        fh.write(json.dumps(record) + "\n")
    with pytest.raises(DimensionError, match="line 2"):
        load(path)


def test_load_reports_line_for_bad_json(tmp_path):
    path = tmp_path / "bad.jsonl"
    path.write_text("this is not json\n")
    with pytest.raises(ParseError, match="line 1"):
        load(path)


def test_keypoints_file_round_trip(tmp_path):
    rng = np.random.default_rng(3)
    positions = rng.standard_normal((4, 52, 3))
    path = tmp_path / "kp.jsonl"
    save_keypoints(path, positions, fps=12.5, dataset="kp")
    loaded = load_keypoints(path)
    assert len(loaded) == 1
    got, fps, dataset = loaded[0]
    assert np.array_equal(got, positions)
    assert fps == 12.5 and dataset == "kp"


def test_synth_static_zero_velocities():
    seq = synth_motion("static", 6, 30.0)
    assert np.all(seq.data[:, 0:3] == 0.0)
    assert np.all(seq.data[:, 157:313] == 0.0)


def test_synth_constant_velocity():
    seq = synth_motion("constant_velocity", 8, 30.0, step=0.1)
    assert np.allclose(seq.data[:, 1], 0.1, atol=1e-12)


def test_synth_sequence_invariants():
    for pattern in ("static", "constant_velocity", "sine_walk"):
        seq = synth_motion(pattern, 7, 24.0, seed=3)
        assert seq.num_frames == 7
        assert seq.fps == 24.0
        assert seq.parts_present.shape == (10,)
        assert np.all(np.isfinite(seq.data))


def test_synth_validation():
    with pytest.raises(ValidationError):
        synth_motion("static", 1, 30.0)
    with pytest.raises(ValidationError):
        synth_motion("wiggle", 5, 30.0)


def test_sine_walk_rate_consistency():
    # the same seed describes one continuous motion: frames of the 30 fps
    # render must match every other frame of the 60 fps render
    lo = synth_motion("sine_walk", 16, 30.0, seed=11)
    hi = synth_motion("sine_walk", 31, 60.0, seed=11)
    half = resample(hi, 2)
    assert half.fps == 30.0
    assert np.max(np.abs(
        half.data[:, STATE_INDICES] - lo.data[:, STATE_INDICES]
    )) < 1e-9


def test_sine_walk_rotation_blocks_decode_to_proper_rotations():
    from motionkit.rotations import rot6d_to_matrix

    seq = synth_motion("sine_walk", 6, 30.0, seed=4)
    blocks = seq.data[:, 313:619].reshape(-1, 6)
    mats = rot6d_to_matrix(blocks)
    assert np.max(np.abs(np.linalg.det(mats) - 1.0)) < 1e-6


def test_sine_walk_seed_changes_motion():
    a = synth_motion("sine_walk", 8, 30.0, seed=0)
    b = synth_motion("sine_walk", 8, 30.0, seed=1)
    assert not np.array_equal(a.data, b.data)


def test_default_weights_sum_to_one():
    assert abs(sum(DEFAULT_DATASET_WEIGHTS.values()) - 1.0) < 1e-12
    assert set(DEFAULT_DATASET_WEIGHTS) == set(DATASET_TASKS)


def test_batch_plan_single_dataset():
    config = BatchPlanConfig(weights={"only": 1.0}, all_replace_prob=0.0)
    pairs = batch_plan(config, 50, rng_seed=0)
    assert all(src == "only" and eff == "only" for src, eff in pairs)


def test_batch_plan_deterministic():
    config = BatchPlanConfig()
    assert batch_plan(config, 100, rng_seed=5) == batch_plan(config, 100, rng_seed=5)


def test_batch_plan_validation():
    with pytest.raises(ValidationError):
        BatchPlanConfig(weights={})
    with pytest.raises(ValidationError):
        BatchPlanConfig(weights={"a": -0.5, "b": 0.2})
    with pytest.raises(ValidationError):
        batch_plan(BatchPlanConfig(), 0)


def test_batch_plan_frequencies():
    n = 100_000
    pairs = batch_plan(BatchPlanConfig(), n, rng_seed=123)
    srcs = [s for s, _ in pairs]
    effs = [e for _, e in pairs]
    freq_h3d = srcs.count("humanml3d") / n
    assert 0.14 <= freq_h3d <= 0.16
    all_rate = sum(e == "all" for e in effs) / n
    assert 0.09 <= all_rate <= 0.11
    # task-level totals
    task_freq = {}
    for s in srcs:
        task = DATASET_TASKS[s]
        task_freq[task] = task_freq.get(task, 0) + 1
    expected = {"t2m": 0.40, "uncond": 0.25, "a2m": 0.10, "s2g": 0.10,
                "m2d": 0.05, "mim": 0.10}
    for task, p in expected.items():
        assert abs(task_freq[task] / n - p) <= 0.01


def test_translate_unified_identity():
    seq = synth_motion("sine_walk", 6, 30.0, seed=2)
    assert translate(seq, "unified") is seq


def test_translate_keypoints_round_trip():
    from motionkit.kinematics import rest_pose_positions

    F, fps = 20, 30.0
    rest = rest_pose_positions()
    t = np.arange(F) / fps
    pos = np.repeat(rest[None], F, axis=0).copy()
    pos[:, :, 0] += (0.25 * np.sin(2 * np.pi * t))[:, None]
    pos[:, :, 2] += (0.4 * t)[:, None]
    seq = keypoints_to_unified(pos, fps)
    back = translate(seq, "keypoints52")
    assert np.max(np.abs(back - pos)) < 1e-6


def test_translate_static_pose_constant():
    seq = synth_motion("static", 5, 30.0)
    kp = translate(seq, "keypoints52")
    assert np.max(np.abs(kp - kp[0])) < 1e-12


def test_translate_unknown_target():
    seq = synth_motion("static", 4, 30.0)
    with pytest.raises(ValidationError):
        translate(seq, "bvh")
