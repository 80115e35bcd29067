"""Scoring annotations against a gold standard, plus efficiency metrics.

Both levels count data elements binary: repeated mentions of an element in
the same note (or sentence) contribute a single true positive. The note-level
score compares unique element sets over the whole note. The sentence-level
score averages per-sentence F1 over the counted sentences, where a sentence
is counted when its gold or predicted element set is non-empty.
"""

from __future__ import annotations

import math
import statistics
from bisect import bisect_right
from dataclasses import dataclass
from typing import Literal, Sequence

from .corpus import ClinicalNote, SentenceSpan
from .errors import EmptyInput, NoEvents, SentenceGapError, SpanOutOfBounds, ZeroWords
from .extractor import Mention
from .project import InteractionEvent

Policy = Literal["ignore-assertion", "affirmed-only"]

Z_95 = 1.96


@dataclass(frozen=True)
class NoteScore:
    note_id: str
    level: str  # "note" | "sentence"
    precision: float
    recall: float
    f1: float
    concept_frequency: int
    length: int


@dataclass(frozen=True)
class MetricSummary:
    mean: float
    ci_low: float
    ci_high: float


@dataclass(frozen=True)
class EvalReport:
    level: str
    scores: tuple[NoteScore, ...]
    precision: MetricSummary
    recall: MetricSummary
    f1: MetricSummary
    corpus_id: str = ""


@dataclass(frozen=True)
class ActivitySummary:
    mouse_count: float
    keyboard_count: float
    total_count: float
    word_count: int
    mouse_per_word: float
    keyboard_per_word: float
    total_per_word: float
    words_per_action: float | None
    minutes_per_note: float | None = None

    def rounded_rates(self, ndigits: int = 3) -> tuple[float, float, float]:
        """Per-device rates rounded for reporting.

        The reported total is the sum of the rounded parts, the convention
        activity tables are assembled with; it can differ in the last digit
        from rounding the raw total rate.
        """
        mouse = round(self.mouse_per_word, ndigits)
        keyboard = round(self.keyboard_per_word, ndigits)
        return mouse, keyboard, round(mouse + keyboard, ndigits)


def _check_spans(mentions: Sequence[Mention], note: ClinicalNote) -> None:
    for m in mentions:
        if m.start < 0 or m.end > len(note.text) or m.start >= m.end:
            raise SpanOutOfBounds(
                f"{note.id}: mention {m.element_id} [{m.start},{m.end}) outside note of "
                f"length {len(note.text)}"
            )


def _elements(mentions: Sequence[Mention], policy: Policy) -> set[str]:
    if policy == "affirmed-only":
        mentions = [m for m in mentions if m.assertion == "affirmed"]
    return {m.element_id for m in mentions}


def _prf(gold: set[str], pred: set[str]) -> tuple[float, float, float]:
    if not gold and not pred:
        return 1.0, 1.0, 1.0
    tp = len(gold & pred)
    p = tp / len(pred) if pred else 0.0
    r = tp / len(gold) if gold else 0.0
    f = 2 * p * r / (p + r) if p + r > 0 else 0.0
    return p, r, f


def note_level_score(
    gold: Sequence[Mention],
    pred: Sequence[Mention],
    note: ClinicalNote,
    policy: Policy = "ignore-assertion",
) -> NoteScore:
    _check_spans(gold, note)
    _check_spans(pred, note)
    p, r, f = _prf(_elements(gold, policy), _elements(pred, policy))
    return NoteScore(
        note_id=note.id,
        level="note",
        precision=p,
        recall=r,
        f1=f,
        concept_frequency=len(gold),
        length=note.word_count,
    )


def _sentence_index(m: Mention, sentences: Sequence[SentenceSpan], note_id: str) -> int:
    starts = [s.start for s in sentences]
    i = bisect_right(starts, m.start) - 1
    if i < 0 or m.start >= sentences[i].end:
        raise SentenceGapError(
            f"{note_id}: mention {m.element_id} at {m.start} falls outside every sentence"
        )
    return i


def sentence_level_score(
    gold: Sequence[Mention],
    pred: Sequence[Mention],
    note: ClinicalNote,
    sentences: Sequence[SentenceSpan],
    policy: Policy = "ignore-assertion",
) -> NoteScore:
    _check_spans(gold, note)
    _check_spans(pred, note)

    def per_sentence(mentions: Sequence[Mention]) -> dict[int, set[str]]:
        if policy == "affirmed-only":
            mentions = [m for m in mentions if m.assertion == "affirmed"]
        sets: dict[int, set[str]] = {}
        for m in mentions:
            sets.setdefault(_sentence_index(m, sentences, note.id), set()).add(m.element_id)
        return sets

    gold_sets = per_sentence(gold)
    pred_sets = per_sentence(pred)
    counted = sorted(set(gold_sets) | set(pred_sets))

    if not counted:
        score = 1.0 if not gold_sets and not pred_sets else 0.0
        p_avg = r_avg = f_avg = score
    else:
        ps, rs, fs = [], [], []
        for i in counted:
            p, r, f = _prf(gold_sets.get(i, set()), pred_sets.get(i, set()))
            ps.append(p)
            rs.append(r)
            fs.append(f)
        n = len(counted)
        p_avg, r_avg, f_avg = sum(ps) / n, sum(rs) / n, sum(fs) / n

    return NoteScore(
        note_id=note.id,
        level="sentence",
        precision=p_avg,
        recall=r_avg,
        f1=f_avg,
        concept_frequency=len(gold),
        length=note.word_count,
    )


def _summary(values: Sequence[float]) -> MetricSummary:
    mean = statistics.fmean(values)
    sd = statistics.stdev(values) if len(values) > 1 else 0.0
    half = Z_95 * sd / math.sqrt(len(values))
    return MetricSummary(
        mean=mean,
        ci_low=max(0.0, mean - half),
        ci_high=min(1.0, mean + half),
    )


def aggregate(scores: Sequence[NoteScore], corpus_id: str = "") -> EvalReport:
    """Per-level means with normal-approximation 95% CIs, clipped to [0, 1]."""
    if not scores:
        raise EmptyInput("no scores to aggregate")
    levels = {s.level for s in scores}
    if len(levels) != 1:
        raise ValueError(f"aggregate needs a single level, got {sorted(levels)}")
    return EvalReport(
        level=scores[0].level,
        scores=tuple(scores),
        precision=_summary([s.precision for s in scores]),
        recall=_summary([s.recall for s in scores]),
        f1=_summary([s.f1 for s in scores]),
        corpus_id=corpus_id,
    )


def normalized_activity(mouse: float, keyboard: float, word_count: int) -> ActivitySummary:
    """Per-word interaction rates and words reviewed per press/click."""
    if word_count <= 0:
        raise ZeroWords("word_count must be positive")
    total = mouse + keyboard
    return ActivitySummary(
        mouse_count=mouse,
        keyboard_count=keyboard,
        total_count=total,
        word_count=word_count,
        mouse_per_word=mouse / word_count,
        keyboard_per_word=keyboard / word_count,
        total_per_word=total / word_count,
        words_per_action=word_count / total if total > 0 else None,
    )


def annotation_time(events: Sequence[InteractionEvent]) -> float:
    """Minutes from first to last event, excluding pause/resume intervals."""
    if not events:
        raise NoEvents("no events for this note")
    first, last = events[0].timestamp_ms, events[-1].timestamp_ms
    paused_ms = 0
    pause_start: int | None = None
    for ev in events:
        if ev.kind == "pause" and pause_start is None:
            pause_start = ev.timestamp_ms
        elif ev.kind == "resume" and pause_start is not None:
            paused_ms += ev.timestamp_ms - pause_start
            pause_start = None
    if pause_start is not None:
        paused_ms += last - pause_start
    return (last - first - paused_ms) / 60_000.0
