"""Contains the text encoders producing embedding vectors."""
from __future__ import annotations

import hashlib
import re
from abc import ABC, abstractmethod
from collections.abc import Mapping
from typing import Optional

import numpy as np

from .custom_types import Vector
from .errors import DimensionMismatchError, MissingEmbeddingError, NonFiniteError

_TOKEN_PATTERN = re.compile(r"[^0-9a-z]+")


def tokenize(text: str) -> list[str]:
    """Split lowercased text on runs of non-alphanumeric characters."""
    return [token for token in _TOKEN_PATTERN.split(text.lower()) if token]


class EncoderHandle(ABC):
    """Turns strings into fixed-dimension vectors."""

    @property
    @abstractmethod
    def dim(self) -> int:
        """Return the dimension of the produced vectors."""

    @abstractmethod
    def embed(self, text: str) -> Vector:
        """Return the embedding of the text."""

    def embed_node(self, node: int, text: Optional[str]) -> Vector:
        """Return the embedding of a graph node."""
        return self.embed(text or "")

    def embed_many(self, texts: list[str]) -> np.ndarray:
        """Return the embeddings of several texts stacked as rows."""
        if not texts:
            return np.zeros((0, self.dim))
        return np.stack([self.embed(text) for text in texts])


class BuiltinEncoder(EncoderHandle):
    """A deterministic hashing bag-of-words encoder."""

    def __init__(self, dim: int = 64, seed: int = 0, positional_buckets: int = 0) -> None:
        """Initialize the encoder."""
        if dim < 1:
            raise ValueError(f"Embedding dimension must be positive, got {dim}.")
        if positional_buckets < 0:
            raise ValueError(f"Number of positional buckets must not be negative, got {positional_buckets}.")
        self._dim = dim
        self.seed = seed
        self.positional_buckets = positional_buckets
        self._key = (seed % 2**64).to_bytes(8, "little")

    @property
    def dim(self) -> int:
        """Return the dimension of the produced vectors."""
        return self._dim

    def _bucket(self, token: str) -> int:
        digest = hashlib.blake2b(token.encode("utf-8"), digest_size=8, key=self._key).digest()
        return int.from_bytes(digest, "little") % self._dim

    def embed(self, text: str) -> Vector:
        """Return the L2-normalized token counts of the text, or zeros for text without tokens."""
        counts = np.zeros(self._dim)
        tokens = tokenize(text)
        for position, token in enumerate(tokens):
            counts[self._bucket(token)] += 1.0
            if self.positional_buckets:
                counts[self._bucket(f"{token}@{self.positional_buckets * position // len(tokens)}")] += 1.0
        norm = np.linalg.norm(counts)
        if norm == 0.0:
            return counts
        return counts / norm

    def __repr__(self) -> str:
        """Return a string representation of the encoder."""
        return (
            f"{self.__class__.__name__}(dim={self._dim}, seed={self.seed}, "
            f"positional_buckets={self.positional_buckets})"
        )


class TableEncoder(EncoderHandle):
    """An encoder looking up precomputed vectors by key."""

    def __init__(self, vectors: Mapping[str, Vector], dim: Optional[int] = None) -> None:
        """Initialize the encoder."""
        dims = {len(vector) for vector in vectors.values()}
        if dim is not None:
            dims.add(dim)
        if len(dims) > 1:
            raise DimensionMismatchError(f"Vectors of different dimensions {sorted(dims)} in one table.")
        self._vectors = {key: np.asarray(vector, dtype=np.float64) for key, vector in vectors.items()}
        for key, vector in self._vectors.items():
            if not np.all(np.isfinite(vector)):
                raise NonFiniteError(f"Vector for key {key!r} has non-finite entries.")
        self._dim = dims.pop() if dims else 0

    @property
    def dim(self) -> int:
        """Return the dimension of the stored vectors."""
        return self._dim

    @property
    def vectors(self) -> Mapping[str, Vector]:
        """Return the stored vectors."""
        return self._vectors

    def embed(self, text: str) -> Vector:
        """Return the stored vector for the text."""
        try:
            return self._vectors[text].copy()
        except KeyError:
            raise MissingEmbeddingError(text) from None

    def embed_node(self, node: int, text: Optional[str]) -> Vector:
        """Return the vector stored under the node id, falling back to the node's text."""
        if str(node) in self._vectors:
            return self.embed(str(node))
        return self.embed(text or "")


def embed(handle: EncoderHandle, text: str) -> Vector:
    """Return the embedding of the text under the given encoder."""
    return handle.embed(text)
