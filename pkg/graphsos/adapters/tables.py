"""Contains the codec of embedding table files."""
from __future__ import annotations

import logging
import re
from collections.abc import Iterable, Mapping
from pathlib import Path
from typing import Optional, Union
from urllib.parse import quote, unquote

import numpy as np

from graphsos.domain.custom_types import Vector
from graphsos.domain.encoder import EncoderHandle, TableEncoder
from graphsos.domain.errors import EmbeddingFormatError

logger = logging.getLogger(__name__)

_NEEDS_QUOTING = re.compile(r"[\s%]")


def encode_key(key: str) -> str:
    """Percent-encode the key if it holds whitespace or a percent sign."""
    if not key:
        raise EmbeddingFormatError("Embedding keys must not be empty.")
    return quote(key, safe="") if _NEEDS_QUOTING.search(key) else key


def load_embedding_table(path: Union[str, Path]) -> TableEncoder:
    """Read a table of precomputed vectors."""
    with open(path, encoding="utf-8") as file:
        lines = [line.rstrip("\n") for line in file]
    header = lines[0].split() if lines else []
    if len(header) != 2 or header[0] != "dim" or not header[1].isdigit():  # noqa: PLR2004
        raise EmbeddingFormatError(f"{path}:1: expected a 'dim <d>' header.")
    dim = int(header[1])
    vectors: dict[str, Vector] = {}
    for number, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        key, *values = line.split()
        if len(values) != dim:
            raise EmbeddingFormatError(f"{path}:{number}: expected {dim} values, got {len(values)}.")
        try:
            vector = np.array([float(value) for value in values], dtype=np.float64)
        except ValueError as error:
            raise EmbeddingFormatError(f"{path}:{number}: {error}") from error
        decoded = unquote(key)
        if decoded in vectors:
            raise EmbeddingFormatError(f"{path}:{number}: duplicate key {decoded!r}.")
        vectors[decoded] = vector
    logger.info(f"Read {len(vectors)} vectors of dimension {dim} from {path}")
    return TableEncoder(vectors, dim)


def write_embedding_table(
    source: Union[EncoderHandle, Mapping[str, Vector]],
    path: Union[str, Path],
    keys: Optional[Iterable[str]] = None,
) -> None:
    """Write vectors to a table file.

    The vectors are taken from a mapping, from the given keys embedded with an encoder or from the entries of a
    table encoder.
    """
    if isinstance(source, Mapping):
        vectors = dict(source)
        dim = len(next(iter(vectors.values()))) if vectors else 0
    elif keys is not None:
        vectors = {key: source.embed(key) for key in keys}
        dim = source.dim
    elif isinstance(source, TableEncoder):
        vectors = dict(source.vectors)
        dim = source.dim
    else:
        raise ValueError("Need keys to write the embeddings of an encoder without a table.")
    with open(path, "w", encoding="utf-8") as file:
        file.write(f"dim {dim}\n")
        for key, vector in vectors.items():
            if len(vector) != dim:
                raise EmbeddingFormatError(f"Vector for key {key!r} has dimension {len(vector)}, expected {dim}.")
            file.write(" ".join([encode_key(key), *(repr(float(value)) for value in vector)]) + "\n")
