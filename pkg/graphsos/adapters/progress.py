"""Contains code for relaying progress information to the user."""
from __future__ import annotations

from abc import ABC, abstractmethod
from typing import Optional

from graphsos.domain.events import Processes
from graphsos.service.progress import ProgressDisplay

_UNITS = {
    Processes.TRAIN_SSM: "step",
    Processes.TRAIN_OSM: "step",
    Processes.DISTILL: "record",
    Processes.BENCH: "trial",
}


class ProgressView(ABC):
    """Progress display."""

    @abstractmethod
    def open(self, description: str, total: int, unit: str) -> None:
        """Open the progress display showing information to the user."""

    @abstractmethod
    def show_loss(self, loss: float) -> None:
        """Show the loss of the step that just finished."""

    @abstractmethod
    def advance(self) -> None:
        """Update the display to reflect that a step finished."""

    @abstractmethod
    def close(self) -> None:
        """Close the progress display."""

    @abstractmethod
    def enable(self) -> None:
        """Enable the view."""

    @abstractmethod
    def disable(self) -> None:
        """Disable the view."""


def describe(process: Processes) -> str:
    """Return the name a process is shown under, matching its subcommand."""
    return process.name.lower().replace("_", "-")


class ProgressDisplayAdapter(ProgressDisplay):
    """Adapter showing the progress of a process on a view."""

    def __init__(self, display: ProgressView) -> None:
        """Initialize the display."""
        self._display = display

    def start(self, process: Processes, total: int) -> None:
        """Start showing progress information to the user."""
        self._display.open(describe(process), total, _UNITS[process])

    def advance(self, step: int, loss: Optional[float]) -> None:
        """Update the display to reflect that a step finished."""
        if loss is not None:
            self._display.show_loss(loss)
        self._display.advance()

    def stop(self) -> None:
        """Stop showing progress information to the user."""
        self._display.close()
