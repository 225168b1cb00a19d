from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest

from graphsos.adapters.tables import encode_key, load_embedding_table, write_embedding_table
from graphsos.domain.encoder import BuiltinEncoder
from graphsos.domain.errors import EmbeddingFormatError


@pytest.mark.parametrize(("key", "expected"), [("n0", "n0"), ("two words", "two%20words"), ("50%", "50%25")])
def test_encode_key(key: str, expected: str) -> None:
    assert encode_key(key) == expected


def test_empty_key_is_rejected() -> None:
    with pytest.raises(EmbeddingFormatError):
        encode_key("")


class TestReadEmbeddingTable:
    @staticmethod
    def test_reads_vectors(tmp_path: Path) -> None:
        path = tmp_path / "table.txt"
        path.write_text("dim 2\nn0 1.0 0.0\n\nn%201 0.5 -0.5\n", encoding="utf-8")
        encoder = load_embedding_table(path)
        assert encoder.dim == 2
        assert list(encoder.embed("n0")) == [1.0, 0.0]
        assert list(encoder.embed("n 1")) == [0.5, -0.5]

    @staticmethod
    @pytest.mark.parametrize(
        ("content", "message"),
        [
            ("", ":1: expected a 'dim <d>' header"),
            ("size 2\n", ":1: expected a 'dim <d>' header"),
            ("dim 2\nn0 1.0\n", ":2: expected 2 values, got 1"),
            ("dim 1\nn0 one\n", ":2:"),
            ("dim 1\nn0 1.0\nn0 2.0\n", ":3: duplicate key 'n0'"),
        ],
    )
    def test_malformed_tables_are_rejected(tmp_path: Path, content: str, message: str) -> None:
        path = tmp_path / "table.txt"
        path.write_text(content, encoding="utf-8")
        with pytest.raises(EmbeddingFormatError, match=message):
            load_embedding_table(path)


class TestWriteEmbeddingTable:
    @staticmethod
    def test_mapping_is_read_back_exactly(tmp_path: Path) -> None:
        vectors = {"n0": np.array([1.0, 0.0]), "two words": np.array([1 / 3, -2.5e-7])}
        write_embedding_table(vectors, tmp_path / "table.txt")
        assert (tmp_path / "table.txt").read_text(encoding="utf-8").splitlines()[2].startswith("two%20words ")
        encoder = load_embedding_table(tmp_path / "table.txt")
        for key, vector in vectors.items():
            assert np.array_equal(encoder.embed(key), vector)

    @staticmethod
    def test_encoder_keys_are_embedded(tmp_path: Path) -> None:
        encoder = BuiltinEncoder(4, seed=2)
        write_embedding_table(encoder, tmp_path / "table.txt", ["graph nodes", "edges"])
        table = load_embedding_table(tmp_path / "table.txt")
        assert np.array_equal(table.embed("graph nodes"), encoder.embed("graph nodes"))

    @staticmethod
    def test_encoder_needs_keys(tmp_path: Path) -> None:
        with pytest.raises(ValueError, match="Need keys"):
            write_embedding_table(BuiltinEncoder(4), tmp_path / "table.txt")

    @staticmethod
    def test_mixed_dimensions_are_rejected(tmp_path: Path) -> None:
        with pytest.raises(EmbeddingFormatError):
            write_embedding_table({"a": np.zeros(2), "b": np.zeros(3)}, tmp_path / "table.txt")
