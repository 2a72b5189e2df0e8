"""Multi-modal condition handling.

The real multi-modal encoder is a frozen black box upstream of the model,
so here it is replaced by a deterministic hash-based embedder behind a
small interface: ``(bytes, modality tag) -> row-major float matrix``. Any
encoder producing matrices of the right width can be dropped in.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .errors import DimensionError, ValidationError

MODALITIES = ("text", "speech", "music", "video")


@dataclass
class ConditionSet:
    """Optional token matrix per modality; width must be heads * latent."""

    text: Optional[np.ndarray] = None
    speech: Optional[np.ndarray] = None
    music: Optional[np.ndarray] = None
    video: Optional[np.ndarray] = None

    def get(self, modality: str) -> Optional[np.ndarray]:
        if modality not in MODALITIES:
            raise ValidationError(f"unknown modality {modality!r}")
        return getattr(self, modality)

    def present(self) -> tuple[str, ...]:
        return tuple(m for m in MODALITIES if self.get(m) is not None)

    def is_empty(self) -> bool:
        return not self.present()

    def check_width(self, width: int) -> None:
        for m in self.present():
            tokens = self.get(m)
            if tokens.ndim != 2 or tokens.shape[1] != width:
                raise DimensionError(
                    f"{m} tokens must be (L, {width}), got {tokens.shape}"
                )
            if tokens.shape[0] < 1:
                raise ValidationError(f"{m} token matrix is empty")


def _chunk_floats(key: bytes, payload: bytes, n: int) -> np.ndarray:
    """n floats in [-1, 1] from a keyed hash of payload, counter-expanded."""
    out = np.empty(n)
    produced = 0
    counter = 0
    while produced < n:
        digest = hashlib.blake2b(
            payload + counter.to_bytes(4, "little"), key=key, digest_size=64
        ).digest()
        words = np.frombuffer(digest, dtype="<u8")
        take = min(n - produced, words.shape[0])
        # map uint64 to [-1, 1]
        out[produced : produced + take] = (
            words[:take].astype(np.float64) / np.float64(2**63) - 1.0
        )
        produced += take
        counter += 1
    return out


@dataclass
class HashEmbedder:
    """Deterministic stand-in for a pretrained multi-modal encoder.

    Input bytes are split into fixed-size chunks; each chunk hashes to one
    token row. Same (input, modality, seed) always gives the same matrix.
    """

    width: int
    seed: int = 0
    chunk_size: int = 8
    max_tokens: int = 64

    def embed(self, raw, modality: str) -> np.ndarray:
        if modality not in MODALITIES:
            raise ValidationError(f"unknown modality {modality!r}")
        if isinstance(raw, str):
            raw = raw.encode("utf-8")
        if not isinstance(raw, (bytes, bytearray)):
            raise ValidationError("raw input must be str or bytes")
        if len(raw) == 0:
            raise ValidationError("cannot embed empty input")
        n_tokens = min(-(-len(raw) // self.chunk_size), self.max_tokens)
        key = hashlib.blake2b(
            f"{self.seed}:{modality}".encode(), digest_size=16
        ).digest()
        rows = []
        for i in range(n_tokens):
            chunk = bytes(raw[i * self.chunk_size : (i + 1) * self.chunk_size])
            rows.append(_chunk_floats(key, i.to_bytes(4, "little") + chunk, self.width))
        return np.stack(rows)


def _seeded_linear(rng: np.random.Generator, out_dim: int, in_dim: int) -> np.ndarray:
    scale = 1.0 / np.sqrt(in_dim)
    return rng.uniform(-scale, scale, size=(out_dim, in_dim))


def _layer_norm(x: np.ndarray, eps: float = 1e-5) -> np.ndarray:
    mean = x.mean(axis=-1, keepdims=True)
    var = x.var(axis=-1, keepdims=True)
    return (x - mean) / np.sqrt(var + eps)


def _softmax(x: np.ndarray, axis: int = -1) -> np.ndarray:
    shifted = x - np.max(x, axis=axis, keepdims=True)
    e = np.exp(shifted)
    return e / np.sum(e, axis=axis, keepdims=True)


@dataclass
class ConditionRefiner:
    """Two pre-norm transformer encoder layers with seeded, frozen weights.

    Single-head self-attention over the token axis plus a position-wise
    feed-forward, both with residuals. Without positional encoding the map
    is equivariant to token permutations.
    """

    width: int
    seed: int = 0
    num_layers: int = 2
    use_positions: bool = False
    params: dict = field(init=False, repr=False)

    def __post_init__(self):
        rng = np.random.default_rng(self.seed)
        w = self.width
        p: dict[str, np.ndarray] = {}
        for layer in range(self.num_layers):
            for name in ("wq", "wk", "wv", "wo"):
                p[f"l{layer}.{name}"] = _seeded_linear(rng, w, w)
            p[f"l{layer}.ff1"] = _seeded_linear(rng, 4 * w, w)
            p[f"l{layer}.ff1b"] = np.zeros(4 * w)
            p[f"l{layer}.ff2"] = _seeded_linear(rng, w, 4 * w)
            p[f"l{layer}.ff2b"] = np.zeros(w)
        self.params = p

    def refine(self, tokens: np.ndarray) -> np.ndarray:
        tokens = np.asarray(tokens, dtype=np.float64)
        if tokens.ndim != 2 or tokens.shape[1] != self.width:
            raise DimensionError(
                f"tokens must be (L, {self.width}), got {tokens.shape}"
            )
        h = tokens.copy()
        if self.use_positions:
            h = h + _sinusoidal_positions(h.shape[0], self.width)
        scale = 1.0 / np.sqrt(self.width)
        for layer in range(self.num_layers):
            p = self.params
            a = _layer_norm(h)
            q = a @ p[f"l{layer}.wq"].T
            k = a @ p[f"l{layer}.wk"].T
            v = a @ p[f"l{layer}.wv"].T
            att = _softmax(q @ k.T * scale, axis=-1)
            h = h + (att @ v) @ p[f"l{layer}.wo"].T
            b = _layer_norm(h)
            hidden = np.maximum(b @ p[f"l{layer}.ff1"].T + p[f"l{layer}.ff1b"], 0.0)
            h = h + hidden @ p[f"l{layer}.ff2"].T + p[f"l{layer}.ff2b"]
        return h


def _sinusoidal_positions(length: int, width: int) -> np.ndarray:
    pos = np.arange(length)[:, None]
    dim = np.arange(width)[None, :]
    angles = pos / np.power(10000.0, (2 * (dim // 2)) / width)
    enc = np.where(dim % 2 == 0, np.sin(angles), np.cos(angles))
    return enc


def dropout_conditions(
    conditions: ConditionSet, p: float = 0.1, rng_seed: int = 0
) -> ConditionSet:
    """Remove each present modality independently with probability ``p``.

    Surviving modalities keep their token values untouched; only removal
    happens here. Deterministic per seed.
    """
    if not 0.0 <= p <= 1.0:
        raise ValidationError(f"probability must be in [0, 1], got {p}")
    rng = np.random.default_rng(rng_seed)
    dropped = {}
    for m in MODALITIES:
        tokens = conditions.get(m)
        if tokens is not None and rng.random() < p:
            dropped[m] = None
    return replace(conditions, **dropped) if dropped else conditions
