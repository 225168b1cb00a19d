from __future__ import annotations

import logging
import math

import pytest

from graphsos.infrastructure.progress import TQDMProgressView


def test_disabled_view_reports_the_mean_loss(caplog: pytest.LogCaptureFixture) -> None:
    view = TQDMProgressView()
    with caplog.at_level(logging.INFO, logger="graphsos.infrastructure.progress"):
        view.open("train-ssm", 3, "step")
        for loss in (0.25, math.nan, 0.75):
            view.show_loss(loss)
            view.advance()
        view.close()
    assert "Mean loss over 2 steps: 0.500000" in caplog.text


def test_closing_an_unopened_view_does_nothing() -> None:
    TQDMProgressView().close()


def test_reopening_resets_the_losses(caplog: pytest.LogCaptureFixture) -> None:
    view = TQDMProgressView()
    view.open("train-osm", 1, "step")
    view.show_loss(1.0)
    view.close()
    with caplog.at_level(logging.INFO, logger="graphsos.infrastructure.progress"):
        view.open("train-osm", 1, "step")
        view.show_loss(3.0)
        view.close()
    assert "Mean loss over 1 steps: 3.000000" in caplog.text
