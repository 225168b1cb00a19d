"""Contains interfaces for relaying information about the progress of long-running processes."""
from __future__ import annotations

from abc import ABC, abstractmethod
from typing import Optional

from graphsos.domain.events import Processes


class ProgressDisplay(ABC):
    """Shows information about the progress of a process to the user."""

    @abstractmethod
    def start(self, process: Processes, total: int) -> None:
        """Start showing progress information to the user."""

    @abstractmethod
    def advance(self, step: int, loss: Optional[float]) -> None:
        """Update the display to reflect that a step finished."""

    @abstractmethod
    def stop(self) -> None:
        """Stop showing progress information to the user."""
