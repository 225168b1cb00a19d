from __future__ import annotations

import pytest

from graphsos.adapters.progress import ProgressDisplayAdapter, ProgressView, describe
from graphsos.domain.events import Processes


class FakeProgressView(ProgressView):
    def __init__(self) -> None:
        self.calls: list[tuple[object, ...]] = []
        self.enabled = False

    def open(self, description: str, total: int, unit: str) -> None:
        self.calls.append(("open", description, total, unit))

    def show_loss(self, loss: float) -> None:
        self.calls.append(("loss", loss))

    def advance(self) -> None:
        self.calls.append(("advance",))

    def close(self) -> None:
        self.calls.append(("close",))

    def enable(self) -> None:
        self.enabled = True

    def disable(self) -> None:
        self.enabled = False


def test_adapter_relays_process_to_view() -> None:
    view = FakeProgressView()
    display = ProgressDisplayAdapter(view)
    display.start(Processes.TRAIN_SSM, 2)
    display.advance(0, 0.123456)
    display.advance(1, None)
    display.stop()
    assert view.calls == [
        ("open", "train-ssm", 2, "step"),
        ("loss", 0.123456),
        ("advance",),
        ("advance",),
        ("close",),
    ]


@pytest.mark.parametrize(
    ("process", "unit"),
    [(Processes.TRAIN_OSM, "step"), (Processes.DISTILL, "record"), (Processes.BENCH, "trial")],
)
def test_every_process_has_a_unit(process: Processes, unit: str) -> None:
    view = FakeProgressView()
    ProgressDisplayAdapter(view).start(process, 10)
    assert view.calls == [("open", describe(process), 10, unit)]


def test_processes_are_described_like_subcommands() -> None:
    assert [describe(process) for process in Processes] == ["train-ssm", "train-osm", "distill", "bench"]
