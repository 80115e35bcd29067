from __future__ import annotations

import pytest

from clean.corpus import ClinicalNote
from clean.extractor import Mention, NegationLexicon
from clean.lexicon import DataElement, Lexicon, make_lexicon


def note_of(text: str, note_id: str = "n1") -> ClinicalNote:
    return ClinicalNote(id=note_id, text=text, word_count=len(text.split()))


def mention(element_id: str, start: int, end: int, note: ClinicalNote,
            assertion: str = "affirmed", source: str = "test") -> Mention:
    return Mention(
        element_id=element_id,
        start=start,
        end=end,
        surface=note.text[start:end],
        assertion=assertion,
        source=source,
    )


def tiny_lexicon(*specs: tuple) -> Lexicon:
    """specs: (element_id, name, synonyms) or (element_id, name, synonyms, patterns)."""
    elements = []
    for spec in specs:
        element_id, name, synonyms = spec[0], spec[1], spec[2]
        patterns = spec[3] if len(spec) > 3 else ()
        elements.append(
            DataElement(
                element_id=element_id,
                name=name,
                category="Test",
                synonyms=tuple(synonyms),
                patterns=tuple(patterns),
            )
        )
    return make_lexicon(elements)


@pytest.fixture
def chf_kd_lexicon() -> Lexicon:
    from clean.lexicon import load_default_lexicon

    return load_default_lexicon()


@pytest.fixture
def default_negation() -> NegationLexicon:
    from clean.extractor import load_negation_lexicon

    return load_negation_lexicon()
