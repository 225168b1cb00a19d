"""Contains answer grading and the statistics of repeated trials."""
from __future__ import annotations

import re
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

_PUNCTUATION = re.compile(r"[^\w\s]")
_WHITESPACE = re.compile(r"\s+")


def normalize_answer(text: str) -> str:
    """Lowercase the text, turn punctuation into spaces and collapse whitespace."""
    return _WHITESPACE.sub(" ", _PUNCTUATION.sub(" ", text.lower())).strip()


def _first_position(label: str, response: str) -> Optional[int]:
    match = re.search(rf"(?<!\w){re.escape(label)}(?!\w)", response)
    return match.start() if match else None


def grade_answer(response: str, gold: str, label_set: Optional[Iterable[str]] = None) -> bool:
    """Return True if the response names the gold answer.

    With a label set the gold label must occur in the response and no other label may occur before it.
    """
    normalized_gold = normalize_answer(gold)
    if not normalized_gold:
        raise ValueError("The gold answer must not be empty.")
    normalized = normalize_answer(response)
    if not label_set:
        return normalized_gold in normalized
    gold_position = _first_position(normalized_gold, normalized)
    if gold_position is None:
        return False
    for label in {normalize_answer(label) for label in label_set} - {normalized_gold, ""}:
        position = _first_position(label, normalized)
        if position is not None and position < gold_position:
            return False
    return True


@dataclass(frozen=True)
class TrialResult:
    """The graded answers of one trial."""

    trial: int
    correct: tuple[bool, ...]
    errors: int = 0
    seed: Optional[int] = field(default=None, compare=False)

    @property
    def accuracy(self) -> float:
        """Return the fraction of correct answers."""
        if not self.correct:
            return 0.0
        return sum(self.correct) / len(self.correct)


@dataclass(frozen=True)
class TrialStats:
    """Descriptive statistics of per-trial accuracies."""

    mean: float
    std: float
    min: float
    q1: float
    median: float
    q3: float
    max: float
    trials: int


def summarize(results: Sequence[TrialResult]) -> TrialStats:
    """Summarize the accuracies of the trials with population statistics and linear quartiles."""
    if not results:
        raise ValueError("Need at least one trial to summarize.")
    accuracies = np.sort(np.array([result.accuracy for result in results], dtype=np.float64))
    q1, median, q3 = np.quantile(accuracies, [0.25, 0.5, 0.75])
    return TrialStats(
        mean=float(np.mean(accuracies)),
        std=float(np.std(accuracies)),
        min=float(accuracies[0]),
        q1=float(q1),
        median=float(median),
        q3=float(q3),
        max=float(accuracies[-1]),
        trials=len(results),
    )
