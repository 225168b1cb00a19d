"""Contains the gateway interfaces."""
from __future__ import annotations

from abc import ABC, abstractmethod
from collections.abc import Sequence

from graphsos.domain.attention import AttentionParams
from graphsos.domain.graph import GraphRecord


class DatasetGateway(ABC):
    """Responsible for reading the graph records a use-case works on."""

    @abstractmethod
    def records(self) -> Sequence[GraphRecord]:
        """Return all graph records."""


class ParamsGateway(ABC):
    """Responsible for loading and storing attention parameters."""

    @abstractmethod
    def load(self) -> AttentionParams:
        """Load the parameters."""

    @abstractmethod
    def save(self, params: AttentionParams) -> None:
        """Store the parameters."""
