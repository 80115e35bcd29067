"""Built-in rule-based annotator: dictionary/regex tagging plus negation.

Tagging turns every matcher hit into an affirmed mention; overlapping hits for
the same element collapse to the widest span. Negation detection then flips a
mention to negated when a trigger phrase sits within a token window inside the
same sentence, unless a terminator or another element's mention intervenes, or
the trigger is embedded in a pseudo-trigger phrase.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterable, Literal, Sequence

from ._text import phrase_pattern
from .corpus import ClinicalNote, SentenceSpan, split_sentences
from .errors import CleanError
from .lexicon import Lexicon, MatcherSet, compile_matchers

Assertion = Literal["affirmed", "negated"]

ROCK_SOURCE = "rock"

_DATA_DIR = Path(__file__).parent / "data"
DEFAULT_NEGATION_PATH = _DATA_DIR / "negation_triggers.txt"


@dataclass(frozen=True)
class Mention:
    """A span annotation of one data element in one note."""

    element_id: str
    start: int
    end: int
    surface: str
    assertion: Assertion = "affirmed"
    source: str = "human"

    def sort_key(self) -> tuple[int, int, str]:
        return (self.start, self.end, self.element_id)

    def overlaps(self, other: "Mention") -> bool:
        return self.start < other.end and other.start < self.end


@dataclass(frozen=True)
class AnnotationSet:
    """Current mentions for one note."""

    note_id: str
    mentions: tuple[Mention, ...]


@dataclass(frozen=True)
class NegationLexicon:
    pre_triggers: tuple[str, ...]
    post_triggers: tuple[str, ...]
    pseudo_triggers: tuple[str, ...]
    terminators: tuple[str, ...]
    scope_window: int = 5

    def __post_init__(self) -> None:
        if self.scope_window < 1:
            raise ValueError("scope_window must be >= 1")
        lists = [self.pre_triggers, self.post_triggers, self.pseudo_triggers, self.terminators]
        seen: set[str] = set()
        for phrases in lists:
            for p in phrases:
                low = p.lower()
                if low in seen:
                    raise ValueError(f"phrase {p!r} appears in more than one trigger list")
                seen.add(low)


def load_negation_lexicon(path: str | Path | None = None, scope_window: int = 5) -> NegationLexicon:
    """Parse the sectioned trigger file: [pre] [post] [pseudo] [term]."""
    path = Path(path) if path is not None else DEFAULT_NEGATION_PATH
    sections: dict[str, list[str]] = {"pre": [], "post": [], "pseudo": [], "term": []}
    current: list[str] | None = None
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("[") and line.endswith("]"):
            name = line[1:-1].strip().lower()
            if name not in sections:
                raise CleanError(f"{path.name}:{lineno}: unknown section {name!r}")
            current = sections[name]
            continue
        if current is None:
            raise CleanError(f"{path.name}:{lineno}: phrase before any section header")
        current.append(line)
    return NegationLexicon(
        pre_triggers=tuple(sections["pre"]),
        post_triggers=tuple(sections["post"]),
        pseudo_triggers=tuple(sections["pseudo"]),
        terminators=tuple(sections["term"]),
        scope_window=scope_window,
    )


def _widest(cluster: list[tuple[int, int]]) -> tuple[int, int]:
    # widest span wins; ties broken by smallest start
    return max(cluster, key=lambda s: (s[1] - s[0], -s[0]))


def merge_overlapping_spans(spans: Iterable[tuple[int, int]]) -> list[tuple[int, int]]:
    """Collapse transitively overlapping spans, keeping the widest of each cluster."""
    ordered = sorted(spans)
    merged: list[tuple[int, int]] = []
    cluster: list[tuple[int, int]] = []
    cluster_end = -1
    for span in ordered:
        if cluster and span[0] >= cluster_end:
            merged.append(_widest(cluster))
            cluster = []
        cluster.append(span)
        cluster_end = max(cluster_end, span[1])
    if cluster:
        merged.append(_widest(cluster))
    return merged


def tag(note: ClinicalNote, matchers: MatcherSet) -> list[Mention]:
    """Run every matcher over the note and emit affirmed mentions."""
    by_element: dict[str, list[tuple[int, int]]] = {}
    for element_id, start, end in matchers.find(note.text):
        by_element.setdefault(element_id, []).append((start, end))

    mentions = []
    for element_id, spans in by_element.items():
        for start, end in merge_overlapping_spans(spans):
            mentions.append(
                Mention(
                    element_id=element_id,
                    start=start,
                    end=end,
                    surface=note.text[start:end],
                    assertion="affirmed",
                    source=ROCK_SOURCE,
                )
            )
    mentions.sort(key=Mention.sort_key)
    return mentions


def _occurrences(phrases: Sequence[str], text: str, base: int) -> list[tuple[int, int]]:
    hits = []
    for phrase in phrases:
        pattern = phrase_pattern(phrase)
        hits.extend((m.start() + base, m.end() + base) for m in pattern.finditer(text))
    return sorted(hits)


def _gap_blocked(
    gap_start: int,
    gap_end: int,
    terminators: list[tuple[int, int]],
    other_mentions: list[Mention],
) -> bool:
    for ts, te in terminators:
        if ts < gap_end and te > gap_start:
            return True
    for m in other_mentions:
        if m.start < gap_end and m.end > gap_start:
            return True
    return False


def detect_negation(
    note: ClinicalNote,
    sentences: Sequence[SentenceSpan],
    mentions: Sequence[Mention],
    neg: NegationLexicon,
) -> list[Mention]:
    """Return the same mentions with assertion flipped where negation applies."""
    text = note.text
    out = list(mentions)

    for sent in sentences:
        idx_here = [i for i, m in enumerate(mentions) if sent.start <= m.start < sent.end]
        if not idx_here:
            continue
        sent_text = text[sent.start:sent.end]
        pre = _occurrences(neg.pre_triggers, sent_text, sent.start)
        post = _occurrences(neg.post_triggers, sent_text, sent.start)
        pseudo = _occurrences(neg.pseudo_triggers, sent_text, sent.start)
        term = _occurrences(neg.terminators, sent_text, sent.start)

        def suppressed(span: tuple[int, int]) -> bool:
            return any(ps <= span[0] and span[1] <= pe for ps, pe in pseudo)

        for i in idx_here:
            m = mentions[i]
            others = [
                mentions[j]
                for j in idx_here
                if mentions[j].element_id != m.element_id
            ]
            negated = False
            for ts, te in pre:
                if te > m.start or suppressed((ts, te)):
                    continue
                if len(text[te:m.start].split()) > neg.scope_window:
                    continue
                if _gap_blocked(te, m.start, term, others):
                    continue
                negated = True
                break
            if not negated:
                for ts, te in post:
                    if ts < m.end or suppressed((ts, te)):
                        continue
                    if len(text[m.end:ts].split()) > neg.scope_window:
                        continue
                    if _gap_blocked(m.end, ts, term, others):
                        continue
                    negated = True
                    break
            if negated:
                out[i] = replace(m, assertion="negated")
    return out


def annotate(
    note: ClinicalNote,
    lexicon: Lexicon,
    neg: NegationLexicon | None = None,
    matchers: MatcherSet | None = None,
) -> AnnotationSet:
    """Full pipeline for one note: sentences, tagging, negation detection."""
    neg = neg if neg is not None else load_negation_lexicon()
    matchers = matchers if matchers is not None else compile_matchers(lexicon)
    sentences = split_sentences(note)
    mentions = detect_negation(note, sentences, tag(note, matchers), neg)
    return AnnotationSet(note_id=note.id, mentions=tuple(mentions))
