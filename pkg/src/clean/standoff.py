"""Reader/writer for the standoff annotation interchange format.

Documents hold entity lines ``T<n><TAB><label> <start> <end><TAB><text>`` and
attribute lines ``A<n><TAB><name> T<n>`` (used for ``Negated``). Offsets are
Unicode character positions into the normalized note text. Serialization is
canonical: entities in numeric id order, then attributes, LF line endings,
so parse and serialize are exact inverses on canonical files.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Sequence

from .corpus import ClinicalNote
from .errors import DuplicateId, NoteMismatch, StandoffParseError, UnknownElement
from .extractor import Mention
from .lexicon import Lexicon

_LABEL_RE = re.compile(r"[A-Za-z0-9_-]+\Z")
NEGATED_ATTR = "Negated"


@dataclass(frozen=True)
class StandoffEntity:
    tid: str
    label: str
    start: int
    end: int
    quoted_text: str


@dataclass(frozen=True)
class StandoffAttribute:
    aid: str
    name: str
    target: str


@dataclass(frozen=True)
class StandoffDoc:
    entities: tuple[StandoffEntity, ...] = ()
    attributes: tuple[StandoffAttribute, ...] = ()

    def negated_tids(self) -> set[str]:
        return {a.target for a in self.attributes if a.name == NEGATED_ATTR}


def _validate_entity(e: StandoffEntity, where: str) -> None:
    if not re.match(r"T[1-9][0-9]*\Z", e.tid):
        raise StandoffParseError(f"{where}: bad entity id {e.tid!r}")
    if not _LABEL_RE.match(e.label):
        raise StandoffParseError(f"{where}: bad label {e.label!r}")
    if e.start < 0 or e.start >= e.end:
        raise StandoffParseError(f"{where}: bad offsets {e.start} {e.end}")
    if "\n" in e.quoted_text or "\r" in e.quoted_text:
        raise StandoffParseError(f"{where}: quoted text contains a line break")


def parse_ann(text: str) -> StandoffDoc:
    """Parse one .ann document; raises with the offending line number."""
    entities: list[StandoffEntity] = []
    attributes: list[StandoffAttribute] = []
    tids: set[str] = set()
    aids: set[str] = set()

    for lineno, line in enumerate(text.splitlines(), start=1):
        where = f"line {lineno}"
        if not line.strip():
            continue
        if line.startswith("T"):
            parts = line.split("\t", 2)
            if len(parts) != 3:
                raise StandoffParseError(f"{where}: expected 3 tab-separated fields")
            tid, mid, quoted = parts
            pieces = mid.split(" ")
            if len(pieces) != 3:
                if ";" in mid:
                    raise StandoffParseError(f"{where}: discontinuous spans are not supported")
                raise StandoffParseError(f"{where}: expected '<label> <start> <end>'")
            label, raw_start, raw_end = pieces
            try:
                start, end = int(raw_start, 10), int(raw_end, 10)
            except ValueError:
                raise StandoffParseError(f"{where}: offsets must be base-10 integers") from None
            entity = StandoffEntity(tid=tid, label=label, start=start, end=end, quoted_text=quoted)
            _validate_entity(entity, where)
            if tid in tids:
                raise DuplicateId(f"{where}: duplicate entity id {tid}")
            tids.add(tid)
            entities.append(entity)
        elif line.startswith("A"):
            parts = line.split("\t")
            if len(parts) != 2:
                raise StandoffParseError(f"{where}: expected 2 tab-separated fields")
            aid, rest = parts
            pieces = rest.split(" ")
            if len(pieces) != 2 or not re.match(r"A[1-9][0-9]*\Z", aid):
                raise StandoffParseError(f"{where}: expected 'A<n><TAB><name> T<n>'")
            name, target = pieces
            if aid in aids:
                raise DuplicateId(f"{where}: duplicate attribute id {aid}")
            aids.add(aid)
            attributes.append(StandoffAttribute(aid=aid, name=name, target=target))
        else:
            raise StandoffParseError(f"{where}: unsupported line type {line[:1]!r}")

    for attr in attributes:
        if attr.target not in tids:
            raise StandoffParseError(f"attribute {attr.aid} targets unknown entity {attr.target}")
    return StandoffDoc(entities=tuple(entities), attributes=tuple(attributes))


def serialize_ann(doc: StandoffDoc) -> str:
    """Canonical text form; parse_ann(serialize_ann(d)) structurally equals d."""
    for e in doc.entities:
        _validate_entity(e, e.tid)
    lines = []
    for e in sorted(doc.entities, key=lambda e: int(e.tid[1:])):
        lines.append(f"{e.tid}\t{e.label} {e.start} {e.end}\t{e.quoted_text}")
    for a in sorted(doc.attributes, key=lambda a: int(a.aid[1:])):
        lines.append(f"{a.aid}\t{a.name} {a.target}")
    return "".join(line + "\n" for line in lines)


def mentions_to_doc(mentions: Sequence[Mention]) -> StandoffDoc:
    """Encode mentions as entities plus Negated attributes; source is dropped."""
    entities = []
    attributes = []
    for i, m in enumerate(mentions, start=1):
        entities.append(
            StandoffEntity(
                tid=f"T{i}",
                label=m.element_id,
                start=m.start,
                end=m.end,
                quoted_text=m.surface.replace("\n", " "),
            )
        )
        if m.assertion == "negated":
            attributes.append(
                StandoffAttribute(aid=f"A{len(attributes) + 1}", name=NEGATED_ATTR, target=f"T{i}")
            )
    return StandoffDoc(entities=tuple(entities), attributes=tuple(attributes))


def entity_to_mention(
    entity: StandoffEntity,
    note: ClinicalNote,
    negated: bool,
    source: str,
) -> Mention:
    if entity.end > len(note.text):
        raise NoteMismatch(
            f"{entity.tid}: span [{entity.start},{entity.end}) exceeds note {note.id!r} "
            f"length {len(note.text)}"
        )
    surface = note.text[entity.start:entity.end]
    if entity.quoted_text not in (surface, surface.replace("\n", " ")):
        raise NoteMismatch(
            f"{entity.tid}: quoted text {entity.quoted_text!r} differs from note slice {surface!r}"
        )
    return Mention(
        element_id=entity.label,
        start=entity.start,
        end=entity.end,
        surface=surface,
        assertion="negated" if negated else "affirmed",
        source=source,
    )


def doc_to_mentions(
    doc: StandoffDoc,
    note: ClinicalNote,
    lexicon: Lexicon | None = None,
    source: str = "file",
) -> list[Mention]:
    """Decode a doc back into mentions against the note it annotates."""
    negated = doc.negated_tids()
    mentions = []
    for entity in doc.entities:
        if lexicon is not None and entity.label not in lexicon:
            raise UnknownElement(f"{entity.tid}: label {entity.label!r} not in lexicon")
        mentions.append(entity_to_mention(entity, note, entity.tid in negated, source))
    mentions.sort(key=Mention.sort_key)
    return mentions
