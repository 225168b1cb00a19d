"""Contains the message bus."""
from __future__ import annotations

import logging
import threading
from typing import Callable, Iterable, Protocol, TypeVar, Union

from graphsos.domain.commands import Command
from graphsos.domain.events import Event

Message = Union[Command, Event]


logger = logging.getLogger(__name__)

T = TypeVar("T", bound=Command)


class CommandHandlers(Protocol):
    """A mapping of command types to handlers."""

    def __getitem__(self, command_type: type[T]) -> Callable[[T], None]:
        """Get the appropriate handler for the given type of command."""

    def __setitem__(self, command_type: type[T], handler: Callable[[T], None]) -> None:
        """Set the appropriate handler for the given type of command."""

    def __contains__(self, command_type: object) -> bool:
        """Return True if a handler is registered for the given type of command."""


V = TypeVar("V", bound=Event)


class EventHandlers(Protocol):
    """A mapping of event types to handlers."""

    def __getitem__(self, event_type: type[V]) -> Iterable[Callable[[V], None]]:
        """Get the appropriate handlers for the given type of event."""

    def __setitem__(self, event_type: type[V], handlers: Iterable[Callable[[V], None]]) -> None:
        """Set the appropriate handlers for the given type of event."""

    def get(self, event_type: type[V], default: Iterable[Callable[[V], None]]) -> Iterable[Callable[[V], None]]:
        """Get the handlers for the given type of event or the default if there are none."""


class MessageBus:
    """A message bus that dispatches domain messages to their appropriate handlers.

    Commands run to completion in the calling thread. Events are dispatched as soon as they are handled, also while
    a command is still running, and one at a time.
    """

    def __init__(self, command_handlers: CommandHandlers, event_handlers: EventHandlers) -> None:
        """Initialize the bus."""
        self._command_handlers = command_handlers
        self._event_handlers = event_handlers
        self._event_lock = threading.RLock()

    def handle(self, message: Message) -> None:
        """Handle the message."""
        if isinstance(message, Command):
            self._handle_command(message)
        elif isinstance(message, Event):
            self._handle_event(message)
        else:
            raise TypeError(f"Unknown message type {type(message)!r}")

    def _handle_command(self, command: Command) -> None:
        if type(command) not in self._command_handlers:
            raise LookupError(f"No handler is configured for {type(command).__name__}.")
        handler = self._command_handlers[type(command)]
        logger.debug(f"Handling command {command!r} with handler {handler!r}")
        try:
            handler(command)
        except Exception:
            logger.exception(f"Error handling command {type(command).__name__} with handler {handler!r}")
            raise

    def _handle_event(self, event: Event) -> None:
        with self._event_lock:
            for handler in self._event_handlers.get(type(event), []):
                try:
                    handler(event)
                except Exception:
                    logger.exception(f"Error handling event {type(event).__name__} with handler {handler!r}")
