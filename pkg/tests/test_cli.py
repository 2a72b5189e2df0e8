import json

import numpy as np
import pytest

from motionkit import io as mio
from motionkit.cli import main
from motionkit.kinematics import rest_pose_positions
from motionkit.layout import POSE_DIM


def run(argv):
    assert main(argv) == 0


@pytest.fixture()
def keypoints_file(tmp_path):
    rest = rest_pose_positions()
    pos = np.repeat(rest[None], 10, axis=0).copy()
    pos[:, :, 0] += 0.05 * np.arange(10)[:, None]
    path = tmp_path / "kp.jsonl"
    mio.save_keypoints(path, pos, fps=30.0)
    return path


def test_convert(tmp_path, keypoints_file):
    out = tmp_path / "unified.jsonl"
    run(["convert", "--in", str(keypoints_file), "--out", str(out)])
    seqs = mio.load(out)
    assert len(seqs) == 1
    assert seqs[0].data.shape == (10, POSE_DIM)
    assert np.allclose(seqs[0].data[:, 1], 0.05, atol=1e-12)


def test_resample_command(tmp_path):
    src = tmp_path / "in.jsonl"
    out = tmp_path / "out.jsonl"
    mio.save([mio.synth_motion("constant_velocity", 12, 30.0)], src)
    run(["resample", "--in", str(src), "--factor", "2", "--out", str(out)])
    seq = mio.load(out)[0]
    assert seq.fps == 15.0
    assert np.allclose(seq.data[:, 1], 0.2, atol=1e-12)


def test_mask_command(tmp_path):
    out = tmp_path / "mask.json"
    run(["mask", "--task", "mp", "--frames", "5", "--k", "3", "--out", str(out)])
    record = json.loads(out.read_text())
    assert record["convention"] == "visibility"
    assert [row[0] for row in record["grid"]] == [1, 1, 1, 0, 0]


def test_mask_command_rejects_bad_boundary(tmp_path, capsys):
    assert main(["mask", "--task", "mp", "--frames", "5", "--k", "9"]) == 2
    assert "error" in capsys.readouterr().err


def test_synth_command(tmp_path):
    out = tmp_path / "synth.jsonl"
    run(["synth", "--pattern", "sine_walk", "--frames", "8", "--fps", "30",
         "--seed", "4", "--out", str(out)])
    seq = mio.load(out)[0]
    assert seq.num_frames == 8


def test_plan_command(tmp_path):
    out = tmp_path / "plan.tsv"
    run(["plan", "--n", "200", "--seed", "1", "--out", str(out)])
    lines = out.read_text().strip().splitlines()
    assert len(lines) == 200
    src, eff = lines[0].split("\t")
    assert src in mio.DEFAULT_DATASET_WEIGHTS
    assert eff == "all" or eff == src


def test_plan_command_custom_config(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"weights": {"solo": 1.0}, "all_replace_prob": 0.0}))
    out = tmp_path / "plan.tsv"
    run(["plan", "--n", "10", "--seed", "0", "--config", str(cfg), "--out", str(out)])
    assert all(line == "solo\tsolo" for line in out.read_text().strip().splitlines())


def test_forward_command(tmp_path, capsys):
    out = tmp_path / "pred.jsonl"
    run(["forward", "--preset", "desk", "--frames", "10", "--seed", "3",
         "--out", str(out)])
    printed = capsys.readouterr().out
    stats = json.loads(printed.strip().splitlines()[1])
    assert stats["frames"] == 10 and stats["width"] == POSE_DIM
    assert mio.load(out)[0].data.shape == (10, POSE_DIM)


def test_forward_with_condition(tmp_path):
    out = tmp_path / "pred.jsonl"
    run(["forward", "--preset", "desk", "--frames", "6", "--seed", "3",
         "--text", "a person waves", "--out", str(out)])
    base = tmp_path / "bare.jsonl"
    run(["forward", "--preset", "desk", "--frames", "6", "--seed", "3",
         "--out", str(base)])
    a = mio.load(out)[0].data
    b = mio.load(base)[0].data
    assert not np.array_equal(a, b)


def test_sample_command(tmp_path):
    out = tmp_path / "sampled.jsonl"
    run(["sample", "--preset", "desk", "--steps", "8", "--frames", "8",
         "--seed", "5", "--out", str(out)])
    seq = mio.load(out)[0]
    assert seq.data.shape == (8, POSE_DIM)
    assert np.all(np.isfinite(seq.data))


def test_sample_command_with_mask(tmp_path):
    out = tmp_path / "sampled.jsonl"
    run(["sample", "--preset", "desk", "--steps", "6", "--frames", "8",
         "--seed", "5", "--mask", "mp", "--k", "4", "--out", str(out)])
    seq = mio.load(out)[0]
    known = mio.synth_motion("constant_velocity", 8, 20.0)
    assert np.array_equal(seq.data[:4], known.data[:4])


def test_inspect_command(tmp_path):
    motion = tmp_path / "m.jsonl"
    mio.save([mio.synth_motion("static", 5, 30.0)], motion)
    out = tmp_path / "report.txt"
    run(["inspect", "--in", str(motion), "--out", str(out)])
    text = out.read_text()
    assert "unified pose width: 669" in text
    assert "left_hand: 180" in text
    assert "sequence 0" in text


ALL_COMMANDS = [
    lambda tmp, kp: ["convert", "--in", str(kp), "--seed", "0"],
    lambda tmp, kp: ["resample", "--in", str(tmp / "base.jsonl"), "--factor", "2",
                     "--seed", "0"],
    lambda tmp, kp: ["mask", "--task", "min", "--frames", "9", "--k1", "2",
                     "--k2", "6", "--seed", "0"],
    lambda tmp, kp: ["synth", "--pattern", "sine_walk", "--frames", "12",
                     "--fps", "30", "--seed", "7"],
    lambda tmp, kp: ["plan", "--n", "500", "--seed", "7"],
    lambda tmp, kp: ["forward", "--preset", "desk", "--frames", "8", "--seed", "7"],
    lambda tmp, kp: ["sample", "--preset", "desk", "--steps", "6", "--frames", "8",
                     "--seed", "7", "--mask", "mp", "--k", "3"],
    lambda tmp, kp: ["inspect", "--in", str(tmp / "base.jsonl"), "--seed", "0"],
]


def test_every_command_is_byte_deterministic(tmp_path, keypoints_file):
    mio.save([mio.synth_motion("sine_walk", 12, 30.0, seed=1)], tmp_path / "base.jsonl")
    for i, make_argv in enumerate(ALL_COMMANDS):
        outputs = []
        for attempt in range(2):
            out = tmp_path / f"out_{i}_{attempt}"
            run(make_argv(tmp_path, keypoints_file) + ["--out", str(out)])
            outputs.append(out.read_bytes())
        assert outputs[0] == outputs[1], f"command {i} not deterministic"
