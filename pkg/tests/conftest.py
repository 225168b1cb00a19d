from __future__ import annotations

from collections.abc import Iterable
from pathlib import Path
from typing import Protocol

import pytest

from graphsos.adapters.records import write_records
from graphsos.domain.graph import GraphRecord


class DatasetWriter(Protocol):
    def __call__(self, records: Iterable[GraphRecord], name: str = ...) -> Path:
        ...


@pytest.fixture()
def write_dataset(tmp_path: Path) -> DatasetWriter:
    def _write_dataset(records: Iterable[GraphRecord], name: str = "graphs.jsonl") -> Path:
        path = tmp_path / name
        write_records(records, path)
        return path

    return _write_dataset
