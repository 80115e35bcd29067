"""Target data-element definitions: loading, validation, lookup, matchers.

The lexicon file is line oriented, UTF-8, one element per record:

    id<TAB>name<TAB>category<TAB>concept_ids<TAB>synonyms<TAB>patterns

The last three fields are semicolon-separated lists; trailing empty fields may
be omitted. Lines starting with ``#`` and blank lines are ignored.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field
from pathlib import Path

from ._text import phrase_pattern
from .errors import BadPattern, DuplicateElementId, LexiconParseError

log = logging.getLogger(__name__)

_ID_RE = re.compile(r"[A-Za-z0-9_-]+\Z")
_DATA_DIR = Path(__file__).parent / "data"
DEFAULT_LEXICON_PATH = _DATA_DIR / "chf_kd_elements.tsv"


@dataclass(frozen=True)
class DataElement:
    element_id: str
    name: str
    category: str
    concept_ids: tuple[str, ...] = ()
    synonyms: tuple[str, ...] = ()
    patterns: tuple[str, ...] = ()


@dataclass(frozen=True)
class Lexicon:
    elements: tuple[DataElement, ...]
    categories: tuple[str, ...]
    _by_id: dict[str, DataElement] = field(init=False, repr=False, compare=False, default_factory=dict)

    def __post_init__(self) -> None:
        for el in self.elements:
            if el.element_id in self._by_id:
                raise DuplicateElementId(el.element_id)
            if el.category not in self.categories:
                raise ValueError(f"category {el.category!r} missing from category list")
            self._by_id[el.element_id] = el

    def __contains__(self, element_id: str) -> bool:
        return element_id in self._by_id

    def __len__(self) -> int:
        return len(self.elements)

    def get(self, element_id: str) -> DataElement:
        return self._by_id[element_id]

    def grouped_by_category(self) -> list[tuple[str, list[DataElement]]]:
        groups = {c: [] for c in self.categories}
        for el in self.elements:
            groups[el.category].append(el)
        return [(c, members) for c, members in groups.items()]


def _validate_element(el: DataElement, where: str) -> None:
    if not _ID_RE.match(el.element_id):
        raise LexiconParseError(f"{where}: bad element id {el.element_id!r}")
    if not el.name:
        raise LexiconParseError(f"{where}: empty name for {el.element_id!r}")
    if any(not s for s in el.synonyms):
        raise LexiconParseError(f"{where}: empty synonym for {el.element_id!r}")
    for pat in el.patterns:
        try:
            re.compile(pat)
        except re.error as exc:
            raise BadPattern(f"{el.element_id}: {pat!r}: {exc}") from exc


def make_lexicon(elements: list[DataElement]) -> Lexicon:
    """Build a validated lexicon, categories ordered by first appearance."""
    categories: list[str] = []
    seen_ids: set[str] = set()
    for el in elements:
        _validate_element(el, el.element_id)
        if el.element_id in seen_ids:
            raise DuplicateElementId(el.element_id)
        seen_ids.add(el.element_id)
        if el.category not in categories:
            categories.append(el.category)
    if not elements:
        log.warning("lexicon has no elements")
    return Lexicon(elements=tuple(elements), categories=tuple(categories))


def _split_list(raw: str) -> tuple[str, ...]:
    return tuple(part.strip() for part in raw.split(";") if part.strip())


def load_lexicon(path: str | Path) -> Lexicon:
    path = Path(path)
    elements: list[DataElement] = []
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        fields = line.split("\t")
        if len(fields) < 2:
            raise LexiconParseError(f"{path.name}:{lineno}: expected at least id and name")
        if len(fields) > 6:
            raise LexiconParseError(f"{path.name}:{lineno}: too many fields ({len(fields)})")
        fields += [""] * (6 - len(fields))
        element_id, name, category = (f.strip() for f in fields[:3])
        el = DataElement(
            element_id=element_id,
            name=name,
            category=category,
            concept_ids=_split_list(fields[3]),
            synonyms=_split_list(fields[4]),
            patterns=_split_list(fields[5]),
        )
        _validate_element(el, f"{path.name}:{lineno}")
        elements.append(el)
    return make_lexicon(elements)


def load_default_lexicon() -> Lexicon:
    return load_lexicon(DEFAULT_LEXICON_PATH)


def filter_by_prefix(lexicon: Lexicon, prefix: str) -> list[DataElement]:
    """Elements whose display name starts with prefix, grouped by category.

    Case-insensitive; empty prefix returns everything. Order is stable:
    category order first, then file order within a category.
    """
    lowered = prefix.lower()
    order = {c: i for i, c in enumerate(lexicon.categories)}
    hits = [el for el in lexicon.elements if el.name.lower().startswith(lowered)]
    return sorted(hits, key=lambda el: order[el.category])


@dataclass(frozen=True)
class MatcherSet:
    """Compiled per-element matchers, reusable across notes."""

    matchers: tuple[tuple[str, re.Pattern[str]], ...]

    def find(self, text: str) -> list[tuple[str, int, int]]:
        """All (element_id, start, end) hits, sorted by (start, end, element)."""
        hits = []
        for element_id, pattern in self.matchers:
            for m in pattern.finditer(text):
                if m.start() < m.end():
                    hits.append((element_id, m.start(), m.end()))
        hits.sort(key=lambda h: (h[1], h[2], h[0]))
        return hits


def compile_matchers(lexicon: Lexicon) -> MatcherSet:
    """Whole-word literal matchers for names/synonyms plus the raw regexes."""
    compiled: list[tuple[str, re.Pattern[str]]] = []
    for el in lexicon.elements:
        terms: list[str] = []
        for term in (el.name, *el.synonyms):
            if term.lower() not in (t.lower() for t in terms):
                terms.append(term)
        for term in terms:
            compiled.append((el.element_id, phrase_pattern(term)))
        for pat in el.patterns:
            try:
                compiled.append((el.element_id, re.compile(pat, re.IGNORECASE)))
            except re.error as exc:
                raise BadPattern(f"{el.element_id}: {pat!r}: {exc}") from exc
    return MatcherSet(matchers=tuple(compiled))
