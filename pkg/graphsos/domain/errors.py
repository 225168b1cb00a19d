"""Contains the exceptions raised by the domain model."""
from __future__ import annotations


class GraphSosError(Exception):
    """Base class for all errors raised by this package."""


class GraphConstructionError(GraphSosError, ValueError):
    """A graph could not be constructed from the given parts."""


class UnknownNodeError(GraphSosError, KeyError):
    """A node that is not part of the graph was requested."""


class UndefinedMetricError(GraphSosError, ValueError):
    """A metric was requested on a graph where it is not defined."""


class SerializationFormatError(GraphSosError, ValueError):
    """A graph lacks the attributes required by the requested serialization kind."""


class ParseError(GraphSosError, ValueError):
    """A rendered graph does not conform to the serialization grammar."""

    def __init__(self, message: str, offset: int) -> None:
        """Initialize the error with the byte offset at which parsing failed."""
        super().__init__(f"{message} (at byte {offset})")
        self.offset = offset


class GraphSemanticError(GraphSosError, ValueError):
    """A rendered graph is well-formed but does not describe a valid graph."""


class MissingEmbeddingError(GraphSosError, KeyError):
    """An embedding table has no vector for the requested key."""

    def __init__(self, key: str) -> None:
        """Initialize the error with the missing key."""
        super().__init__(f"No embedding stored for key {key!r}")
        self.key = key


class EmbeddingFormatError(GraphSosError, ValueError):
    """An embedding table file is malformed."""


class DimensionMismatchError(GraphSosError, ValueError):
    """Vectors or matrices with incompatible shapes were combined."""


class CheckpointFormatError(GraphSosError, ValueError):
    """An attention checkpoint file is malformed."""


class NonFiniteError(GraphSosError, FloatingPointError):
    """A computation produced or received a non-finite value."""


class TransportError(GraphSosError, RuntimeError):
    """Communicating with a remote backend failed."""

    def __init__(self, message: str, attempts: int = 1) -> None:
        """Initialize the error with the number of attempts that were made."""
        super().__init__(f"{message} (after {attempts} attempt{'s' if attempts != 1 else ''})")
        self.reason = message
        self.attempts = attempts


class BackendSpecError(GraphSosError, ValueError):
    """A backend specification string could not be understood."""
