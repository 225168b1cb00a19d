"""Contains prompt templates, tuning records and the supervised and preference losses."""
from __future__ import annotations

import math
import warnings
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import NonFiniteError
from .graph import TextGraph
from .serialization import Ordering, SerializationKind, SerializedGraph, serialize

ANALYSIS_MARKER = "Analysis:"
REASONING_MARKER = "Reasoning:"
ANSWER_MARKER = "Answer:"

COT_INSTRUCTION = (
    "First analyze the graph's features and structure under 'Analysis:', "
    "then derive the answer under 'Reasoning:', ending with 'Answer:'"
)

DEFAULT_BETA = 0.1


def build_prompt(serialized: SerializedGraph, question: str) -> str:
    """Return the prompt asking the question about the rendered graph."""
    return f"{serialized.text}\nQuestion: {question}\n{ANSWER_MARKER}"


def build_cot_prompt(graph: TextGraph, question: str, kind: SerializationKind) -> str:
    """Return the prompt asking for an analysis and a reasoning step before the answer."""
    serialized = serialize(graph, Ordering.identity(graph), kind)
    return f"{serialized.text}\nQuestion: {question}\n{COT_INSTRUCTION}"


def validate_cot(answer: str) -> bool:
    """Return True if the answer holds the analysis, reasoning and answer markers in this order."""
    analysis = answer.find(ANALYSIS_MARKER)
    if analysis < 0:
        return False
    reasoning = answer.find(REASONING_MARKER, analysis + len(ANALYSIS_MARKER))
    if reasoning < 0:
        return False
    return answer.find(ANSWER_MARKER, reasoning + len(REASONING_MARKER)) >= 0


@dataclass(frozen=True)
class CotRecord:
    """A prompt with its plain answer and its distilled Graph-CoT answer."""

    prompt: str
    sft_answer: Optional[str] = None
    cot_answer: Optional[str] = None

    def __post_init__(self) -> None:
        """Check that present answers are non-empty and the CoT answer is well-formed."""
        if self.sft_answer is not None and not self.sft_answer:
            raise ValueError("The SFT answer must not be empty.")
        if self.cot_answer is not None and not validate_cot(self.cot_answer):
            raise ValueError("The CoT answer lacks the analysis and reasoning sections.")


@dataclass(frozen=True)
class PreferenceRecord:
    """A prompt with a preferred and a rejected answer."""

    x: str
    y_w: str
    y_l: str

    def __post_init__(self) -> None:
        """Check that the two answers differ."""
        if self.y_w == self.y_l:
            raise ValueError("The winning and losing answers must differ.")


@dataclass(frozen=True)
class SftExample:
    """A prompt with the answer a model is tuned to produce."""

    prompt: str
    answer: str


@dataclass(frozen=True)
class TokenLogProbs:
    """Per-token log-probabilities of an answer under a policy."""

    values: tuple[float, ...]
    policy: str = "theta"

    def __post_init__(self) -> None:
        """Check that every entry is a finite non-positive number."""
        if not all(math.isfinite(value) for value in self.values):
            raise NonFiniteError("Token log-probabilities must be finite.")
        if any(value > 0 for value in self.values):
            raise ValueError("Token log-probabilities must not be positive.")

    @property
    def total(self) -> float:
        """Return the log-probability of the whole answer."""
        return math.fsum(self.values)


def sft_loss(batch: Sequence[TokenLogProbs]) -> float:
    """Return the negative log-likelihood summed over every token of every example."""
    if not batch:
        raise ValueError("The SFT loss needs at least one example.")
    return 0.0 - math.fsum(value for example in batch for value in example.values)


def dpo_loss(lw_theta: float, lw_ref: float, ll_theta: float, ll_ref: float, beta: float = DEFAULT_BETA) -> float:
    """Return -log sigmoid(beta * margin), computed as a softplus."""
    if beta <= 0:
        raise ValueError(f"Beta must be positive, got {beta}.")
    margin = (lw_theta - lw_ref) - (ll_theta - ll_ref)
    return float(np.logaddexp(0.0, -beta * margin))


def build_dpo_dataset(records: Iterable[CotRecord]) -> tuple[list[PreferenceRecord], int]:
    """Pair every complete record's CoT answer (winning) with its plain answer (losing)."""
    pairs: list[PreferenceRecord] = []
    skipped = 0
    for record in records:
        if record.cot_answer is None or record.sft_answer is None or record.cot_answer == record.sft_answer:
            skipped += 1
            continue
        pairs.append(PreferenceRecord(record.prompt, record.cot_answer, record.sft_answer))
    if skipped:
        warnings.warn(f"Skipped {skipped} records without two distinct answers.", category=UserWarning, stacklevel=2)
    return pairs, skipped


def build_sft_dataset(records: Iterable[CotRecord]) -> list[SftExample]:
    """Return the prompt and plain answer of every record that has one."""
    return [SftExample(record.prompt, record.sft_answer) for record in records if record.sft_answer is not None]
