"""Contains the codec of attention parameter checkpoints."""
from __future__ import annotations

import logging
from pathlib import Path
from typing import Union

import numpy as np

from graphsos.domain.attention import AttentionParams
from graphsos.domain.errors import CheckpointFormatError, DimensionMismatchError, NonFiniteError
from graphsos.service.gateway import ParamsGateway

logger = logging.getLogger(__name__)

HEADER = "attn"


def dumps_params(params: AttentionParams) -> str:
    """Return the checkpoint text: a header followed by one row per line of every query and key projection."""
    lines = [f"{HEADER} {params.h} {params.d}"]
    for projections in (params.w_q, params.w_k):
        for head in projections:
            lines.extend(" ".join(repr(float(value)) for value in row) for row in head)
    return "\n".join(lines) + "\n"


def loads_params(text: str) -> AttentionParams:
    """Parse checkpoint text."""
    lines = [line for line in text.splitlines() if line.strip()]
    header = lines[0].split() if lines else []
    if len(header) != 3 or header[0] != HEADER or not (header[1].isdigit() and header[2].isdigit()):  # noqa: PLR2004
        raise CheckpointFormatError(f"Expected an '{HEADER} <h> <d>' header, got {lines[0] if lines else ''!r}.")
    h, d = int(header[1]), int(header[2])
    if h < 1 or d % h:
        raise CheckpointFormatError(f"Cannot split dimension {d} across {h} heads.")
    d_k = d // h
    rows = lines[1:]
    if len(rows) != 2 * h * d:
        raise CheckpointFormatError(f"Expected {2 * h * d} rows for {h} heads of dimension {d}, got {len(rows)}.")
    try:
        values = np.array([[float(value) for value in row.split()] for row in rows], dtype=np.float64)
    except ValueError as error:
        raise CheckpointFormatError(f"Invalid number in checkpoint: {error}") from error
    if values.ndim != 2 or values.shape[1] != d_k:  # noqa: PLR2004
        raise CheckpointFormatError(f"Every row must hold {d_k} values.")
    w_q, w_k = values.reshape(2, h, d, d_k)
    try:
        return AttentionParams(w_q.copy(), w_k.copy())
    except (DimensionMismatchError, NonFiniteError) as error:
        raise CheckpointFormatError(str(error)) from error


def write_params(params: AttentionParams, path: Union[str, Path]) -> None:
    """Write the parameters to a checkpoint file."""
    Path(path).write_text(dumps_params(params), encoding="utf-8")
    logger.info(f"Wrote {params!r} to {path}")


def read_params(path: Union[str, Path]) -> AttentionParams:
    """Read the parameters from a checkpoint file."""
    params = loads_params(Path(path).read_text(encoding="utf-8"))
    logger.info(f"Read {params!r} from {path}")
    return params


class FileParamsGateway(ParamsGateway):
    """Gateway for attention parameters stored in a checkpoint file."""

    def __init__(self, path: Union[str, Path]) -> None:
        """Initialize the gateway."""
        self.path = Path(path)

    def load(self) -> AttentionParams:
        """Load the parameters from the file."""
        return read_params(self.path)

    def save(self, params: AttentionParams) -> None:
        """Store the parameters in the file."""
        write_params(params, self.path)
