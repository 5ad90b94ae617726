"""Encoder registry.

Identifiers of the form ``hash:<dim>`` select the built-in deterministic
feature-hashing encoder (no model download, useful for tests and offline
runs); anything else is treated as a sentence-transformers model name and
loaded lazily.  The output dimension is always discovered from the encoder
at runtime, never assumed.
"""

from __future__ import annotations

import hashlib
import re

import numpy as np


class EncoderError(RuntimeError):
    """Encoder could not be resolved or loaded."""


class HashingEncoder:
    """Deterministic bag-of-tokens hashing encoder with signed buckets."""

    def __init__(self, dim: int, seed: int = 0):
        if dim <= 0:
            raise EncoderError(f"hash encoder needs a positive dimension, got {dim}")
        self.dim = dim
        self.seed = seed
        self._token_re = re.compile(r"\w+")

    @property
    def name(self) -> str:
        return f"hash:{self.dim}:{self.seed}"

    def _digest(self, token: str, salt: str) -> int:
        payload = f"{self.seed}|{salt}|{token}".encode("utf-8")
        return int.from_bytes(hashlib.md5(payload).digest()[:8], "big")

    def encode(self, texts: list[str]) -> np.ndarray:
        out = np.zeros((len(texts), self.dim), dtype=np.float64)
        for row, text in enumerate(texts):
            for token in self._token_re.findall(text.lower()):
                bucket = self._digest(token, "bucket") % self.dim
                sign = 1.0 if self._digest(token, "sign") % 2 == 0 else -1.0
                out[row, bucket] += sign
        norms = np.linalg.norm(out, axis=1, keepdims=True)
        np.divide(out, norms, out=out, where=norms > 0)
        return out


class SentenceTransformerEncoder:
    """Thin adapter over a sentence-transformers model."""

    def __init__(self, model_name: str):
        try:
            from sentence_transformers import SentenceTransformer
        except ImportError as e:
            raise EncoderError(
                "sentence-transformers is not installed; use a hash:<dim> encoder "
                "or install the 'st' extra"
            ) from e
        try:
            self._model = SentenceTransformer(model_name)
        except Exception as e:
            raise EncoderError(f"could not load encoder {model_name!r}: {e}") from e
        self.name = model_name
        dim = self._model.get_sentence_embedding_dimension()
        if not dim:
            dim = int(self._model.encode(["probe"]).shape[1])
        self.dim = int(dim)

    def encode(self, texts: list[str]) -> np.ndarray:
        return np.asarray(
            self._model.encode(texts, show_progress_bar=False, convert_to_numpy=True),
            dtype=np.float64,
        )


def resolve_encoder(identifier: str):
    """Build an encoder from its identifier string."""
    if identifier.startswith("hash:"):
        parts = identifier.split(":")
        if len(parts) not in (2, 3):
            raise EncoderError(f"bad hash encoder spec {identifier!r}; expected hash:<dim>[:seed]")
        try:
            dim = int(parts[1])
            seed = int(parts[2]) if len(parts) == 3 else 0
        except ValueError as e:
            raise EncoderError(f"bad hash encoder spec {identifier!r}: {e}") from e
        return HashingEncoder(dim, seed)
    return SentenceTransformerEncoder(identifier)
