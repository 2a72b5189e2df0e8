import numpy as np
import pytest

from motionkit.condition import (
    MODALITIES,
    ConditionRefiner,
    ConditionSet,
    HashEmbedder,
    dropout_conditions,
)
from motionkit.errors import DimensionError, ValidationError

WIDTH = 40  # 10 heads * latent 4


def test_embed_deterministic():
    emb = HashEmbedder(width=WIDTH, seed=3)
    a = emb.embed("a person walks forward", "text")
    b = emb.embed("a person walks forward", "text")
    assert np.array_equal(a, b)


def test_embed_distinguishes_nearby_inputs():
    emb = HashEmbedder(width=WIDTH, seed=3)
    assert not np.array_equal(emb.embed("abc", "text"), emb.embed("abd", "text"))


def test_embed_corpus_has_no_collisions():
    emb = HashEmbedder(width=WIDTH, seed=0)
    corpus = [f"sample phrase number {i}" for i in range(200)]
    mats = [emb.embed(s, "text") for s in corpus]
    flat = {m.tobytes() for m in mats}
    assert len(flat) == len(corpus)


def test_embed_modality_and_seed_matter():
    emb = HashEmbedder(width=WIDTH, seed=0)
    other = HashEmbedder(width=WIDTH, seed=1)
    assert not np.array_equal(emb.embed("abc", "text"), emb.embed("abc", "music"))
    assert not np.array_equal(emb.embed("abc", "text"), other.embed("abc", "text"))


def test_embed_token_count():
    emb = HashEmbedder(width=WIDTH, seed=0, chunk_size=8, max_tokens=16)
    assert emb.embed(b"x", "text").shape == (1, WIDTH)
    assert emb.embed(b"x" * 8, "text").shape == (1, WIDTH)
    assert emb.embed(b"x" * 9, "text").shape == (2, WIDTH)
    assert emb.embed(b"x" * 1000, "text").shape == (16, WIDTH)


def test_embed_values_bounded():
    emb = HashEmbedder(width=WIDTH, seed=0)
    m = emb.embed("bounded values", "speech")
    assert np.all(m >= -1.0) and np.all(m <= 1.0)


def test_embed_rejects_bad_input():
    emb = HashEmbedder(width=WIDTH, seed=0)
    with pytest.raises(ValidationError):
        emb.embed("", "text")
    with pytest.raises(ValidationError):
        emb.embed("hello", "smell")


def test_refine_preserves_shape():
    refiner = ConditionRefiner(width=WIDTH, seed=0)
    rng = np.random.default_rng(0)
    for L in (1, 7, 64):
        tokens = rng.standard_normal((L, WIDTH))
        out = refiner.refine(tokens)
        assert out.shape == (L, WIDTH)
        assert np.all(np.isfinite(out))


def test_refine_permutation_equivariance():
    refiner = ConditionRefiner(width=WIDTH, seed=1, use_positions=False)
    rng = np.random.default_rng(1)
    tokens = rng.standard_normal((9, WIDTH))
    perm = rng.permutation(9)
    assert np.allclose(
        refiner.refine(tokens)[perm], refiner.refine(tokens[perm]), atol=1e-12
    )


def test_refine_deterministic():
    rng = np.random.default_rng(2)
    tokens = rng.standard_normal((5, WIDTH))
    a = ConditionRefiner(width=WIDTH, seed=7).refine(tokens)
    b = ConditionRefiner(width=WIDTH, seed=7).refine(tokens)
    assert np.array_equal(a, b)


def test_refine_rejects_wrong_width():
    refiner = ConditionRefiner(width=WIDTH, seed=0)
    with pytest.raises(DimensionError):
        refiner.refine(np.zeros((3, WIDTH + 1)))


def test_dropout_identity_and_total():
    rng = np.random.default_rng(3)
    full = ConditionSet(
        text=rng.standard_normal((4, WIDTH)),
        music=rng.standard_normal((2, WIDTH)),
    )
    kept = dropout_conditions(full, p=0.0, rng_seed=1)
    assert kept.present() == ("text", "music")
    gone = dropout_conditions(full, p=1.0, rng_seed=1)
    assert gone.is_empty()


def test_dropout_survivors_untouched():
    rng = np.random.default_rng(4)
    full = ConditionSet(text=rng.standard_normal((4, WIDTH)))
    for seed in range(50):
        out = dropout_conditions(full, p=0.5, rng_seed=seed)
        if out.text is not None:
            assert np.array_equal(out.text, full.text)


def test_dropout_rate():
    rng = np.random.default_rng(5)
    full = ConditionSet(**{m: rng.standard_normal((2, WIDTH)) for m in MODALITIES})
    n = 10_000
    drops = np.zeros(len(MODALITIES))
    for seed in range(n):
        out = dropout_conditions(full, p=0.1, rng_seed=seed)
        drops += [out.get(m) is None for m in MODALITIES]
    rates = drops / n
    assert np.all(rates >= 0.09) and np.all(rates <= 0.11)


def test_condition_set_width_check():
    good = ConditionSet(text=np.zeros((2, WIDTH)))
    good.check_width(WIDTH)
    with pytest.raises(DimensionError):
        good.check_width(WIDTH + 10)
    with pytest.raises(ValidationError):
        ConditionSet(text=np.zeros((0, WIDTH))).check_width(WIDTH)
