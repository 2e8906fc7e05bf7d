"""Deterministic text encoders used by the mock retrieval and rerank stages.

The default encoder is a hashed bag-of-tokens embedding: every token is
mapped to a fixed dimension (and sign) through sha1, counts are accumulated
and the vector is L2-normalized. No model weights, fully reproducible across
processes, which is what the search-index and reranker contracts need. Real
encoders can be plugged in behind the same ``encode`` surface.
"""

from __future__ import annotations

import hashlib
import re

import numpy as np

DEFAULT_DIM = 256

_TOKEN_RE = re.compile(r"[a-z0-9]+(?:'[a-z]+)?")


def tokenize(text: str) -> list[str]:
    """Lowercase alphanumeric tokens; apostrophes kept inside words."""
    return _TOKEN_RE.findall(text.lower())


def _token_slot(token: str, dim: int) -> tuple[int, float]:
    digest = hashlib.sha1(token.encode("utf-8")).digest()
    index = int.from_bytes(digest[:4], "big") % dim
    sign = 1.0 if digest[4] & 1 else -1.0
    return index, sign


def normalize(vec: np.ndarray) -> np.ndarray:
    norm = float(np.linalg.norm(vec))
    if norm == 0.0:
        return vec
    return vec / norm


class HashedTextEncoder:
    """Hashed bag-of-tokens text embedding, unit-norm (zero for empty text)."""

    def __init__(self, dim: int = DEFAULT_DIM):
        if dim < 1:
            raise ValueError("encoder dimension must be positive")
        self.dim = dim

    def encode(self, text: str) -> np.ndarray:
        return self.encode_tokens(tokenize(text))

    def encode_tokens(self, tokens: list[str]) -> np.ndarray:
        vec = np.zeros(self.dim, dtype=np.float64)
        for token in tokens:
            index, sign = _token_slot(token, self.dim)
            vec[index] += sign
        return normalize(vec)


class MultiVectorQueryEncoder:
    """Encode a (question, image) pair into ``n`` query-token vectors.

    Vector 0 embeds the whole question, blended with the image embedding when
    one is available; the remaining slots embed round-robin token groups so
    different facets of the question land in different vectors. Slots with no
    tokens fall back to the whole-question vector, keeping all ``n`` defined.
    """

    def __init__(self, text_encoder: HashedTextEncoder | None = None):
        self.text_encoder = text_encoder or HashedTextEncoder()

    def encode(
        self,
        question: str,
        image_embedding: np.ndarray | None = None,
        n: int = 8,
    ) -> np.ndarray:
        if n < 1:
            raise ValueError("n must be >= 1")
        whole = self.text_encoder.encode(question)
        if image_embedding is not None and image_embedding.shape == whole.shape:
            whole = normalize(whole + np.asarray(image_embedding, dtype=np.float64))

        vectors = np.tile(whole, (n, 1))
        tokens = tokenize(question)
        groups = n - 1
        if groups > 0 and tokens:
            for j in range(groups):
                group = tokens[j::groups]
                if group:
                    vectors[j + 1] = self.text_encoder.encode_tokens(group)
        return vectors
