"""Logic associated with presenting information about finished use-cases."""
from __future__ import annotations

import csv
import json
from collections.abc import Callable
from dataclasses import asdict
from pathlib import Path
from typing import Any, Optional, Union

from graphsos.domain import events
from graphsos.domain.graph import GraphRecord

from .records import encode_record

Emit = Callable[[str], None]

STATS_SUFFIX = ".stats.json"


def _dumps(obj: Any) -> str:
    return json.dumps(obj, ensure_ascii=False)


def create_serialized_presenter(emit: Emit) -> Callable[[events.GraphsSerialized], None]:
    """Create a presenter emitting every rendering as one JSON string."""

    def present_serialized(response: events.GraphsSerialized) -> None:
        for text in response.texts:
            emit(_dumps(text))

    return present_serialized


def create_trace_presenter(emit: Emit) -> Callable[[events.SubgraphsSampled], None]:
    """Create a presenter emitting every sampled subgraph as a graph record."""

    def present_traces(response: events.SubgraphsSampled) -> None:
        for trace in response.traces:
            obj = encode_record(GraphRecord(trace.subgraph, target=trace.target))
            obj["log_prob"] = trace.log_prob
            obj["exhausted"] = trace.exhausted
            emit(_dumps(obj))

    return present_traces


def create_selection_presenter(emit: Emit) -> Callable[[events.OrdersSelected], None]:
    """Create a presenter emitting the chosen candidate of every selection."""

    def present_selections(response: events.OrdersSelected) -> None:
        for selection in response.selections:
            obj = {
                "index": selection.mask.hard,
                "text": selection.chosen.text,
                "weights": [float(weight) for weight in selection.weights],
            }
            emit(_dumps(obj))

    return present_selections


def create_training_presenter(emit: Emit) -> Callable[[Union[events.SsmTrained, events.OsmTrained]], None]:
    """Create a presenter summarizing a finished training run."""

    def present_training(response: Union[events.SsmTrained, events.OsmTrained]) -> None:
        result = response.result
        final = result.losses[-1] if result.losses else float("nan")
        emit(f"steps {result.steps} skipped {result.skipped} final_loss {final!r}")

    return present_training


def create_cot_writer(sft_path: Path, dpo_path: Path, emit: Emit) -> Callable[[events.CotDataBuilt], None]:
    """Create a writer storing the SFT rows as {prompt, answer} and the DPO rows as {prompt, chosen, rejected}."""

    def write_cot_data(response: events.CotDataBuilt) -> None:
        with open(sft_path, "w", encoding="utf-8") as file:
            for example in response.sft:
                file.write(_dumps({"prompt": example.prompt, "answer": example.answer}) + "\n")
        with open(dpo_path, "w", encoding="utf-8") as file:
            for pair in response.dpo:
                file.write(_dumps({"prompt": pair.x, "chosen": pair.y_w, "rejected": pair.y_l}) + "\n")
        emit(f"sft {len(response.sft)} dpo {len(response.dpo)} dropped {response.dropped} skipped {response.skipped}")

    return write_cot_data


def stats_path(out: Path) -> Path:
    """Return the path of the statistics file accompanying a trial table."""
    return out.with_name(out.name + STATS_SUFFIX)


def create_trials_writer(out: Optional[Path], emit: Emit) -> Callable[[events.OrderTrialsRun], None]:
    """Create a writer storing the per-trial table as CSV and the statistics as JSON next to it."""

    def write_trials(response: events.OrderTrialsRun) -> None:
        rows = [["trial", "accuracy", "errors"]]
        rows.extend([str(result.trial), repr(result.accuracy), str(result.errors)] for result in response.results)
        stats: dict[str, Any] = asdict(response.stats)
        if response.sweep:
            stats["m_sweep"] = [{"m": m, **asdict(sweep_stats)} for m, sweep_stats in response.sweep]
        if out is None:
            for row in rows:
                emit(",".join(row))
            emit(_dumps(stats))
            return
        with open(out, "w", encoding="utf-8", newline="") as file:
            csv.writer(file, lineterminator="\n").writerows(rows)
        stats_path(out).write_text(json.dumps(stats, indent=2) + "\n", encoding="utf-8")
        emit(f"mean {response.stats.mean!r} std {response.stats.std!r}")

    return write_trials


def create_metrics_presenter(emit: Emit) -> Callable[[events.MetricsComputed], None]:
    """Create a presenter emitting one '<name> <value>' line per metric."""

    def present_metrics(response: events.MetricsComputed) -> None:
        for name, value in response.rows:
            emit(f"{name} {value!r}")

    return present_metrics


def create_scoring_data_presenter(emit: Emit) -> Callable[[events.ScoringDataBuilt], None]:
    """Create a presenter emitting every scoring example as {text, label, homophily, target}."""

    def present_scoring_data(response: events.ScoringDataBuilt) -> None:
        for example in response.examples:
            obj = {
                "text": example.serialized.text,
                "label": example.label,
                "homophily": example.homophily,
                "target": example.target,
            }
            emit(_dumps(obj))

    return present_scoring_data


def create_graph_presenter(emit: Emit) -> Callable[[events.GraphGenerated], None]:
    """Create a presenter emitting a generated graph as one graph record."""

    def present_graph(response: events.GraphGenerated) -> None:
        emit(_dumps(encode_record(GraphRecord(response.graph))))

    return present_graph
