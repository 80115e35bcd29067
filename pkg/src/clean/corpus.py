"""Note ingestion, sentence splitting, corpus statistics, selection, splits.

Notes are plain-text files; ingestion normalizes them to UTF-8 with LF line
endings. A word is a maximal run of non-whitespace characters. The sentence
splitter is rule based: it cuts after sentence terminators (. ! ?) followed by
whitespace, at blank lines, and around section-header lines ending in ":".
Tokens on a shipped abbreviation stop-list never end a sentence, and a period
followed by a lowercase continuation is treated as non-terminal.
"""

from __future__ import annotations

import random
import re
import statistics
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Mapping

from ._text import phrase_pattern
from .errors import EmptyCorpus, EmptyNote, MissingStratumLabel, QuerySyntaxError

_DATA_DIR = Path(__file__).parent / "data"
_TERMINATOR_RE = re.compile(r"[.!?]+(?=\s)")


@dataclass(frozen=True)
class ClinicalNote:
    """One normalized clinical note."""

    id: str
    text: str
    word_count: int
    condition: str | None = None


@dataclass(frozen=True)
class SentenceSpan:
    """Half-open [start, end) character span of one sentence."""

    index: int
    start: int
    end: int


@dataclass(frozen=True)
class Corpus:
    notes: tuple[ClinicalNote, ...]
    sentences: dict[str, tuple[SentenceSpan, ...]] = field(compare=False)

    def __post_init__(self) -> None:
        ids = [n.id for n in self.notes]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate note ids in corpus")
        missing = [i for i in ids if i not in self.sentences]
        if missing:
            raise ValueError(f"missing sentence spans for notes: {missing}")

    def get(self, note_id: str) -> ClinicalNote:
        for note in self.notes:
            if note.id == note_id:
                return note
        raise KeyError(note_id)

    def __len__(self) -> int:
        return len(self.notes)


@dataclass(frozen=True)
class CorpusStats:
    note_count: int
    total_words: int
    mean_words_per_note: float
    stddev_words_per_note: float


def ingest_note(data: bytes, note_id: str, condition: str | None = None) -> ClinicalNote:
    """Decode raw file bytes into a normalized note.

    Invalid byte sequences become U+FFFD; CRLF and lone CR become LF.
    """
    if not data:
        raise EmptyNote(f"{note_id}: empty file")
    text = data.decode("utf-8", errors="replace")
    text = text.replace("\r\n", "\n").replace("\r", "\n")
    if not text.strip():
        raise EmptyNote(f"{note_id}: only whitespace")
    return ClinicalNote(id=note_id, text=text, word_count=len(text.split()), condition=condition)


def load_abbreviations(path: Path | None = None) -> frozenset[str]:
    """Sentence-terminal abbreviation stop-list, lowercased, one per line."""
    path = path or (_DATA_DIR / "abbreviations.txt")
    out = set()
    for line in path.read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            out.add(line.lower())
    return frozenset(out)


_DEFAULT_ABBREVIATIONS: frozenset[str] | None = None


def _abbreviations() -> frozenset[str]:
    global _DEFAULT_ABBREVIATIONS
    if _DEFAULT_ABBREVIATIONS is None:
        _DEFAULT_ABBREVIATIONS = load_abbreviations()
    return _DEFAULT_ABBREVIATIONS


def split_sentences(note: ClinicalNote, abbreviations: frozenset[str] | None = None) -> list[SentenceSpan]:
    """Split a note into sentence spans covering every non-whitespace char."""
    text = note.text
    abbrevs = abbreviations if abbreviations is not None else _abbreviations()
    cuts = {0, len(text)}

    # line-structure cuts: blank lines break, header lines stand alone
    pos = 0
    while pos <= len(text):
        nl = text.find("\n", pos)
        line_end = nl if nl != -1 else len(text)
        line = text[pos:line_end]
        stripped = line.strip()
        if not stripped:
            cuts.add(pos)
        elif stripped.endswith(":"):
            cuts.add(pos)
            cuts.add(line_end)
        if nl == -1:
            break
        pos = nl + 1

    # terminator cuts
    for m in _TERMINATOR_RE.finditer(text):
        tok_start = m.start()
        while tok_start > 0 and not text[tok_start - 1].isspace():
            tok_start -= 1
        token = text[tok_start:m.end()].lower()
        if token in abbrevs:
            continue
        if set(m.group()) == {"."}:
            # lowercase continuation suggests the period is not terminal
            rest = text[m.end():].lstrip()
            if rest and rest[0].islower():
                continue
        cuts.add(m.end())

    spans: list[SentenceSpan] = []
    ordered = sorted(cuts)
    for a, b in zip(ordered, ordered[1:]):
        seg = text[a:b]
        lead = len(seg) - len(seg.lstrip())
        trail = len(seg) - len(seg.rstrip())
        start, end = a + lead, b - trail
        if start < end:
            spans.append(SentenceSpan(index=len(spans), start=start, end=end))
    return spans


def build_corpus(notes: Iterable[ClinicalNote]) -> Corpus:
    notes = tuple(notes)
    return Corpus(notes=notes, sentences={n.id: tuple(split_sentences(n)) for n in notes})


def load_corpus(directory: str | Path, condition: str | None = None) -> Corpus:
    """Load every <note-id>.txt under a directory, in sorted filename order."""
    directory = Path(directory)
    notes = []
    for path in sorted(directory.glob("*.txt")):
        notes.append(ingest_note(path.read_bytes(), path.stem, condition=condition))
    return build_corpus(notes)


def corpus_stats(corpus: Corpus) -> CorpusStats:
    if not corpus.notes:
        raise EmptyCorpus("corpus has no notes")
    counts = [n.word_count for n in corpus.notes]
    stddev = statistics.stdev(counts) if len(counts) > 1 else 0.0
    return CorpusStats(
        note_count=len(counts),
        total_words=sum(counts),
        mean_words_per_note=statistics.fmean(counts),
        stddev_words_per_note=stddev,
    )


# --- boolean keyword queries ---------------------------------------------
#
# expr   := term ("OR" term)*
# term   := factor ("AND" factor)*
# factor := phrase | "(" expr ")"
# phrase := WORD+ | quoted string
#
# Adjacent bare words form one phrase; phrases match case-insensitively on
# token boundaries. AND and OR are recognized in any letter case.

_TOKEN_RE = re.compile(r'"([^"]*)"|\(|\)|[^\s()"]+')


class _Node:
    def matches(self, text: str) -> bool:
        raise NotImplementedError


class _Phrase(_Node):
    def __init__(self, phrase: str, position: int):
        if not phrase.split():
            raise QuerySyntaxError("empty phrase", position)
        self.pattern = phrase_pattern(phrase)

    def matches(self, text: str) -> bool:
        return self.pattern.search(text) is not None


class _Bool(_Node):
    def __init__(self, op: str, children: list[_Node]):
        self.op = op
        self.children = children

    def matches(self, text: str) -> bool:
        if self.op == "and":
            return all(c.matches(text) for c in self.children)
        return any(c.matches(text) for c in self.children)


def _tokenize(query: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    for m in _TOKEN_RE.finditer(query):
        between = query[pos:m.start()]
        if between.strip():
            raise QuerySyntaxError(f"unexpected character {between.strip()[0]!r}", pos)
        pos = m.end()
        tok = m.group()
        if tok == "(":
            tokens.append(("lparen", tok, m.start()))
        elif tok == ")":
            tokens.append(("rparen", tok, m.start()))
        elif m.group(1) is not None:
            tokens.append(("quoted", m.group(1), m.start()))
        elif tok.upper() in ("AND", "OR"):
            tokens.append(("op", tok.upper(), m.start()))
        else:
            tokens.append(("word", tok, m.start()))
    if query[pos:].strip():
        raise QuerySyntaxError(f"unexpected character {query[pos:].strip()[0]!r}", pos)
    return tokens


class _Parser:
    def __init__(self, query: str):
        self.query = query
        self.tokens = _tokenize(query)
        self.i = 0

    def peek(self) -> tuple[str, str, int] | None:
        return self.tokens[self.i] if self.i < len(self.tokens) else None

    def parse(self) -> _Node:
        if not self.tokens:
            raise QuerySyntaxError("empty query", 0)
        node = self.expr()
        tok = self.peek()
        if tok is not None:
            raise QuerySyntaxError(f"unexpected {tok[1]!r}", tok[2])
        return node

    def expr(self) -> _Node:
        children = [self.term()]
        while (tok := self.peek()) and tok[0] == "op" and tok[1] == "OR":
            self.i += 1
            children.append(self.term())
        return children[0] if len(children) == 1 else _Bool("or", children)

    def term(self) -> _Node:
        children = [self.factor()]
        while (tok := self.peek()) and tok[0] == "op" and tok[1] == "AND":
            self.i += 1
            children.append(self.factor())
        return children[0] if len(children) == 1 else _Bool("and", children)

    def factor(self) -> _Node:
        tok = self.peek()
        if tok is None:
            raise QuerySyntaxError("expected keyword or (", len(self.query))
        kind, value, position = tok
        if kind == "lparen":
            self.i += 1
            node = self.expr()
            closing = self.peek()
            if closing is None or closing[0] != "rparen":
                raise QuerySyntaxError("missing )", position)
            self.i += 1
            return node
        if kind == "quoted":
            self.i += 1
            return _Phrase(value, position)
        if kind == "word":
            words = []
            while (tok := self.peek()) and tok[0] == "word":
                words.append(tok[1])
                self.i += 1
            return _Phrase(" ".join(words), position)
        raise QuerySyntaxError(f"unexpected {value!r}", position)


def parse_query(query: str) -> Callable[[str], bool]:
    """Compile a boolean keyword query into a text predicate."""
    node = _Parser(query).parse()
    return node.matches


def select_by_query(corpus: Corpus, query: str) -> Corpus:
    """Sub-corpus of notes whose text satisfies the query, order preserved."""
    predicate = parse_query(query)
    selected = tuple(n for n in corpus.notes if predicate(n.text))
    return Corpus(notes=selected, sentences={n.id: corpus.sentences[n.id] for n in selected})


def stratified_split(
    corpus: Corpus,
    strata: Mapping[str, str] | Callable[[ClinicalNote], str | None],
    k: int = 2,
    seed: int = 0,
) -> list[Corpus]:
    """Deal each stratum's notes round-robin into k sets after a seeded shuffle."""
    if k < 1:
        raise ValueError("k must be >= 1")
    label_of: Callable[[ClinicalNote], str | None]
    if callable(strata):
        label_of = strata
    else:
        label_of = lambda n: strata.get(n.id)  # noqa: E731

    by_label: dict[str, list[ClinicalNote]] = {}
    for note in corpus.notes:
        label = label_of(note)
        if label is None:
            raise MissingStratumLabel(f"note {note.id!r} has no stratum label")
        by_label.setdefault(label, []).append(note)

    rng = random.Random(seed)
    assignment: dict[str, int] = {}
    for label in sorted(by_label):
        members = list(by_label[label])
        rng.shuffle(members)
        for i, note in enumerate(members):
            assignment[note.id] = i % k

    out = []
    for set_index in range(k):
        chosen = tuple(n for n in corpus.notes if assignment[n.id] == set_index)
        out.append(Corpus(notes=chosen, sentences={n.id: corpus.sentences[n.id] for n in chosen}))
    return out


def split_manifest(corpus: Corpus, splits: list[Corpus], seed: int) -> str:
    """Manifest text: a seed header plus one note-id<TAB>set-index line per note."""
    index_of = {n.id: i for i, part in enumerate(splits) for n in part.notes}
    lines = [f"# seed={seed}"]
    for note in corpus.notes:
        lines.append(f"{note.id}\t{index_of[note.id]}")
    return "\n".join(lines) + "\n"
