import numpy as np
import pytest

from motionkit.errors import ContractError, ValidationError
from motionkit.layout import NUM_PARTS, PART_NAMES
from motionkit.masks import (
    BodyPartMask,
    MaskConvention,
    MaskStrategy,
    Task,
    TaskSpec,
    drop_to_visibility,
    loss_weights,
    random_train_mask,
    source_drop_mask,
    task_mask,
    visibility_to_drop,
)


def test_mp_boundary_pattern():
    mask = task_mask(TaskSpec(task=Task.MP, k=3), num_frames=5)
    assert mask.convention is MaskConvention.VISIBILITY
    expected = np.array([1, 1, 1, 0, 0])
    assert np.array_equal(mask.grid, np.repeat(expected[:, None], NUM_PARTS, axis=1))


def test_min_boundary_pattern():
    mask = task_mask(TaskSpec(task=Task.MIN, k1=2, k2=4), num_frames=6)
    expected = np.array([1, 1, 0, 0, 1, 1])
    assert np.array_equal(mask.grid, np.repeat(expected[:, None], NUM_PARTS, axis=1))


def test_condition_only_tasks_are_all_zero():
    for task in (Task.T2M, Task.A2M, Task.M2D, Task.S2G, Task.MIM, Task.MMG):
        mask = task_mask(TaskSpec(task=task), num_frames=4)
        assert not mask.grid.any()


def test_task_mask_is_pure():
    spec = TaskSpec(task=Task.CMP, k=7)
    a = task_mask(spec, 20)
    b = task_mask(spec, 20)
    assert np.array_equal(a.grid, b.grid)


def test_boundary_validation():
    with pytest.raises(ValidationError):
        task_mask(TaskSpec(task=Task.MP, k=5), num_frames=5)  # k must be < F
    with pytest.raises(ValidationError):
        task_mask(TaskSpec(task=Task.MP, k=0), num_frames=5)
    with pytest.raises(ValidationError):
        TaskSpec(task=Task.MIN, k1=4, k2=2)
    with pytest.raises(ValidationError):
        task_mask(TaskSpec(task=Task.MIN, k1=2, k2=9), num_frames=6)
    with pytest.raises(ValidationError):
        TaskSpec(task=Task.CMP)  # missing k


def test_randomized_boundary_patterns():
    rng = np.random.default_rng(0)
    for _ in range(50):
        F = int(rng.integers(2, 100))
        k = int(rng.integers(1, F))
        grid = task_mask(TaskSpec(task=Task.MP, k=k), F).grid
        expected = (np.arange(1, F + 1) <= k).astype(np.uint8)
        assert np.array_equal(grid, np.repeat(expected[:, None], NUM_PARTS, axis=1))
        if F >= 3:
            k1 = int(rng.integers(1, F - 1))
            k2 = int(rng.integers(k1 + 1, F + 1))
            grid = task_mask(TaskSpec(task=Task.MIN, k1=k1, k2=k2), F).grid
            x = np.arange(1, F + 1)
            expected = (~((x > k1) & (x <= k2))).astype(np.uint8)
            assert np.array_equal(
                grid, np.repeat(expected[:, None], NUM_PARTS, axis=1)
            )


def test_random_train_mask_zero_probability():
    rng = np.random.default_rng(1)
    src = BodyPartMask(
        (rng.random((8, NUM_PARTS)) < 0.3).astype(np.uint8), MaskConvention.DROP
    )
    for strategy in MaskStrategy:
        out = random_train_mask(src, 0.0, strategy, rng_seed=42)
        assert np.array_equal(out.grid, src.grid)


def test_random_train_mask_saturated_source():
    src = BodyPartMask.ones(6, MaskConvention.DROP)
    out = random_train_mask(src, 0.9, MaskStrategy.PER_FRAME, rng_seed=3)
    assert np.all(out.grid == 1)


def test_random_train_mask_is_monotone_superset():
    rng = np.random.default_rng(2)
    src = BodyPartMask(
        (rng.random((10, NUM_PARTS)) < 0.2).astype(np.uint8), MaskConvention.DROP
    )
    for strategy in MaskStrategy:
        for seed in range(200):
            out = random_train_mask(src, 0.35, strategy, rng_seed=seed)
            assert np.all(out.grid >= src.grid)


def test_random_train_mask_deterministic_per_seed():
    src = BodyPartMask.zeros(12, MaskConvention.DROP)
    a = random_train_mask(src, 0.5, MaskStrategy.SPAN, rng_seed=9)
    b = random_train_mask(src, 0.5, MaskStrategy.SPAN, rng_seed=9)
    assert np.array_equal(a.grid, b.grid)


def test_per_part_drop_frequency():
    # Monte-Carlo oracle: empirical per-column rate ~ p over many seeds
    src = BodyPartMask.zeros(4, MaskConvention.DROP)
    hits = np.zeros(NUM_PARTS)
    n = 10_000
    for seed in range(n):
        out = random_train_mask(src, 0.3, MaskStrategy.PER_PART, rng_seed=seed)
        hits += out.grid[0]
    rates = hits / n
    assert np.all(rates >= 0.28) and np.all(rates <= 0.32)


def test_span_length_bounded():
    src = BodyPartMask.zeros(20, MaskConvention.DROP)
    for seed in range(300):
        out = random_train_mask(src, 0.25, MaskStrategy.SPAN, rng_seed=seed)
        assert out.grid.sum(axis=0).max() <= int(0.25 * 20)


def test_random_train_mask_requires_drop_convention():
    vis = BodyPartMask.zeros(4, MaskConvention.VISIBILITY)
    with pytest.raises(ContractError):
        random_train_mask(vis, 0.1)
    with pytest.raises(ValidationError):
        random_train_mask(BodyPartMask.zeros(4, MaskConvention.DROP), 1.5)


def test_loss_weights_fully_observed():
    src = BodyPartMask.zeros(5, MaskConvention.DROP)
    assert np.all(loss_weights(src) == 1.0)


def test_loss_weights_column_masking():
    src = BodyPartMask.zeros(5, MaskConvention.DROP)
    col = PART_NAMES.index("left_hand")
    src.grid[:, col] = 1
    w = loss_weights(src)
    assin = np.ones((5, NUM_PARTS))
    assin[:, col] = 0.0
    assert np.array_equal(w, assin)


def test_loss_weights_complement_identity():
    rng = np.random.default_rng(4)
    grid = (rng.random((7, NUM_PARTS)) < 0.5).astype(np.uint8)
    src = BodyPartMask(grid, MaskConvention.DROP)
    assert np.array_equal(loss_weights(src), 1.0 - grid)
    assert np.array_equal(loss_weights(src) + grid, np.ones_like(grid, dtype=float))


def test_loss_weights_rejects_visibility():
    with pytest.raises(ContractError):
        loss_weights(BodyPartMask.zeros(3, MaskConvention.VISIBILITY))


def test_visibility_drop_conversion():
    vis = BodyPartMask.ones(4, MaskConvention.VISIBILITY)
    drop = visibility_to_drop(vis)
    assert drop.convention is MaskConvention.DROP
    assert not drop.grid.any()

    mp = task_mask(TaskSpec(task=Task.MP, k=3), 5)
    dropped = visibility_to_drop(mp)
    assert np.array_equal(dropped.grid[:, 0], [0, 0, 0, 1, 1])


def test_conversion_is_involution():
    rng = np.random.default_rng(5)
    grid = (rng.random((6, NUM_PARTS)) < 0.5).astype(np.uint8)
    vis = BodyPartMask(grid, MaskConvention.VISIBILITY)
    back = drop_to_visibility(visibility_to_drop(vis))
    assert back.convention is MaskConvention.VISIBILITY
    assert np.array_equal(back.grid, vis.grid)
    with pytest.raises(ContractError):
        visibility_to_drop(visibility_to_drop(vis))


def test_source_drop_mask_from_parts():
    present = np.ones(NUM_PARTS, dtype=bool)
    present[PART_NAMES.index("face")] = False
    mask = source_drop_mask(present, 3)
    assert mask.convention is MaskConvention.DROP
    assert np.all(mask.grid[:, PART_NAMES.index("face")] == 1)
    assert mask.grid.sum() == 3
