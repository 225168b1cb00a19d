from __future__ import annotations

from typing import Optional

import pytest

from graphsos.domain.grading import TrialResult, grade_answer, normalize_answer, summarize

LABELS = ("student", "course", "staff", "faculty")


def test_normalize_answer() -> None:
    assert normalize_answer("  The Answer:\tFaculty. ") == "the answer faculty"


@pytest.mark.parametrize(
    ("response", "gold", "labels", "expected"),
    [
        ("The answer is: Faculty.", "faculty", LABELS, True),
        ("student or faculty", "faculty", LABELS, False),
        ("faculty, not student", "faculty", LABELS, True),
        ("", "faculty", LABELS, False),
        ("faculty members", "faculty", None, True),
        ("Paris is the capital.", "paris", None, True),
        ("Berlin", "paris", None, False),
        ("coursework", "course", LABELS, False),
    ],
)
def test_grade_answer(response: str, gold: str, labels: Optional[tuple[str, ...]], expected: bool) -> None:
    assert grade_answer(response, gold, labels) is expected


def test_gold_must_not_be_empty() -> None:
    with pytest.raises(ValueError, match="must not be empty"):
        grade_answer("anything", " . ")


class TestTrialResult:
    @staticmethod
    def test_accuracy() -> None:
        assert TrialResult(0, (True, False, True, True)).accuracy == 0.75

    @staticmethod
    def test_empty_trial_has_zero_accuracy() -> None:
        assert TrialResult(0, ()).accuracy == 0.0


class TestSummarize:
    @staticmethod
    def test_four_trials() -> None:
        results = [TrialResult(t, (True,) * (t + 1) + (False,) * (4 - t)) for t in range(4)]
        stats = summarize(results)
        assert stats.mean == pytest.approx(0.5)
        assert stats.std == pytest.approx(0.2236, abs=1e-4)
        assert (stats.min, stats.max) == (pytest.approx(0.2), pytest.approx(0.8))
        assert (stats.q1, stats.median, stats.q3) == (pytest.approx(0.35), pytest.approx(0.5), pytest.approx(0.65))
        assert stats.trials == 4

    @staticmethod
    def test_single_trial_has_no_spread() -> None:
        stats = summarize([TrialResult(0, (True,) * 7 + (False,) * 3)])
        assert stats.std == 0.0
        assert stats.mean == pytest.approx(0.7)

    @staticmethod
    def test_needs_trials() -> None:
        with pytest.raises(ValueError, match="at least one"):
            summarize([])
