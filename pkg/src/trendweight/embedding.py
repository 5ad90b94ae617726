"""Vector-space helpers: cosine similarity and a deterministic hashing embedder.

The hashing embedder is a test-time stand-in for a pretrained sentence
encoder: it needs no model files, is reproducible across platforms, and
gives disjoint vocabularies near-orthogonal vectors.
"""

from __future__ import annotations

import hashlib
import re

import numpy as np

_TOKEN_RE = re.compile(r"\w+")


def cosine_similarity(a: np.ndarray, b: np.ndarray) -> float:
    """Cosine of the angle between two vectors, clamped to [-1, 1].

    Raises ValueError on dimension mismatch or a zero-norm argument; the
    message says which side offends so callers can name the instance.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    na = float(np.linalg.norm(a))
    nb = float(np.linalg.norm(b))
    if na == 0.0:
        raise ValueError("zero-norm vector on left side of cosine_similarity")
    if nb == 0.0:
        raise ValueError("zero-norm vector on right side of cosine_similarity")
    return float(np.clip(np.dot(a, b) / (na * nb), -1.0, 1.0))


def _token_hash(token: str, seed: int, salt: bytes) -> int:
    h = hashlib.blake2b(
        token.encode("utf-8"), digest_size=8, key=seed.to_bytes(8, "little"), person=salt
    )
    return int.from_bytes(h.digest(), "little")


def tokenize(text: str) -> list[str]:
    """Lowercased word tokens, split on whitespace/punctuation."""
    return _TOKEN_RE.findall(text.lower())


def hash_embed(text: str, d: int, seed: int = 0) -> np.ndarray:
    """Feature-hash a text into a unit-norm d-dimensional vector.

    Each token lands in a bucket chosen by a keyed hash and contributes a
    +/-1 sign from a second hash; the accumulated vector is L2-normalized.
    Identical text always yields the identical vector.  A text with no
    tokens cannot be embedded and raises ValueError.
    """
    if d <= 0:
        raise ValueError(f"embedding dimension must be positive, got {d}")
    tokens = tokenize(text)
    if not tokens:
        raise ValueError("text has no tokens and cannot be embedded")
    v = np.zeros(d, dtype=np.float64)
    for tok in tokens:
        bucket = _token_hash(tok, seed, b"bucket") % d
        sign = 1.0 if _token_hash(tok, seed, b"sign") % 2 == 0 else -1.0
        v[bucket] += sign
    norm = float(np.linalg.norm(v))
    if norm == 0.0:
        # token signs can cancel exactly inside one bucket
        raise ValueError("hashed token signs cancelled; text is unembeddable")
    return v / norm
