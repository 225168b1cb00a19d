"""Contains views for showing progress information to the user."""
from __future__ import annotations

import logging
import math
import sys
from typing import NoReturn, Optional

from tqdm.auto import tqdm

from graphsos.adapters.progress import ProgressView

logger = logging.getLogger(__name__)


class TQDMProgressView(ProgressView):
    """A view drawing a tqdm bar on stderr with the latest and the running mean loss."""

    def __init__(self) -> None:
        """Initialize the view."""
        self.__progress_bar: Optional[tqdm[NoReturn]] = None
        self._is_disabled: bool = True
        self._loss_sum = 0.0
        self._loss_count = 0

    @property
    def _progress_bar(self) -> tqdm[NoReturn]:
        assert self.__progress_bar is not None
        return self.__progress_bar

    def open(self, description: str, total: int, unit: str) -> None:
        """Start showing the progress bar."""
        logger.debug(f"Opening progress bar for {description} with {total} {unit}s")
        self._loss_sum, self._loss_count = 0.0, 0
        self.__progress_bar = tqdm(
            total=total, desc=description, unit=unit, file=sys.stderr, dynamic_ncols=True, disable=self._is_disabled
        )

    def show_loss(self, loss: float) -> None:
        """Show the loss and the mean of every finite loss since the bar was opened."""
        if math.isfinite(loss):
            self._loss_sum += loss
            self._loss_count += 1
        mean = self._loss_sum / self._loss_count if self._loss_count else math.nan
        self._progress_bar.set_postfix(loss=f"{loss:.4f}", mean=f"{mean:.4f}", refresh=False)

    def advance(self) -> None:
        """Update the bar to show a step finished."""
        self._progress_bar.update()

    def close(self) -> None:
        """Stop showing the progress bar."""
        if self.__progress_bar is None:
            return
        self.__progress_bar.close()
        self.__progress_bar = None
        if self._loss_count:
            logger.info(f"Mean loss over {self._loss_count} steps: {self._loss_sum / self._loss_count:.6f}")

    def enable(self) -> None:
        """Enable the progress bar."""
        self._is_disabled = False

    def disable(self) -> None:
        """Disable the progress bar."""
        self._is_disabled = True
