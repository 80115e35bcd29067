from __future__ import annotations

import random

import pytest

from clean.errors import DuplicateId, NoteMismatch, StandoffParseError, UnknownElement
from clean.standoff import (
    StandoffAttribute,
    StandoffDoc,
    StandoffEntity,
    doc_to_mentions,
    mentions_to_doc,
    parse_ann,
    serialize_ann,
)

from conftest import mention, note_of, tiny_lexicon


class TestParse:
    def test_canonical_entity_line(self):
        doc = parse_ann("T1\tnatriuretic_peptides 120 123\tBNP\n")
        assert doc.entities == (
            StandoffEntity(tid="T1", label="natriuretic_peptides", start=120, end=123, quoted_text="BNP"),
        )
        assert doc.attributes == ()

    def test_empty_document(self):
        doc = parse_ann("")
        assert doc == StandoffDoc()

    def test_blank_lines_ignored(self):
        doc = parse_ann("\nT1\tchf 0 3\tabc\n\n")
        assert len(doc.entities) == 1

    def test_reversed_offsets_rejected(self):
        with pytest.raises(StandoffParseError):
            parse_ann("T1\tchf 34 10\tx\n")

    def test_error_carries_line_number(self):
        with pytest.raises(StandoffParseError) as err:
            parse_ann("T1\tchf 0 3\tabc\nT2\tbroken line\n")
        assert "line 2" in str(err.value)

    def test_duplicate_entity_id(self):
        with pytest.raises(DuplicateId):
            parse_ann("T1\tchf 0 3\tabc\nT1\tchf 4 7\tdef\n")

    def test_attribute_line(self):
        doc = parse_ann("T1\tchf 0 3\tabc\nA1\tNegated T1\n")
        assert doc.attributes == (StandoffAttribute(aid="A1", name="Negated", target="T1"),)
        assert doc.negated_tids() == {"T1"}

    def test_attribute_needs_existing_target(self):
        with pytest.raises(StandoffParseError):
            parse_ann("A1\tNegated T9\n")

    def test_discontinuous_span_rejected_clearly(self):
        with pytest.raises(StandoffParseError) as err:
            parse_ann("T1\tchf 0 4;6 10\tab cd\n")
        assert "discontinuous" in str(err.value)

    def test_unsupported_line_type(self):
        with pytest.raises(StandoffParseError):
            parse_ann("R1\tRel Arg1:T1 Arg2:T2\n")

    def test_non_integer_offsets(self):
        with pytest.raises(StandoffParseError):
            parse_ann("T1\tchf 0x1 5\tab\n")

    def test_quoted_text_keeps_spaces(self):
        doc = parse_ann("T1\tchf 10 34\tcongestive heart failure\n")
        assert doc.entities[0].quoted_text == "congestive heart failure"


class TestSerialize:
    def test_entity_line_exact_bytes(self):
        doc = StandoffDoc(
            entities=(StandoffEntity("T1", "natriuretic_peptides", 120, 123, "BNP"),)
        )
        assert serialize_ann(doc) == "T1\tnatriuretic_peptides 120 123\tBNP\n"

    def test_negated_attribute_after_entities(self):
        doc = StandoffDoc(
            entities=(StandoffEntity("T1", "chf", 0, 3, "abc"),),
            attributes=(StandoffAttribute("A1", "Negated", "T1"),),
        )
        assert serialize_ann(doc) == "T1\tchf 0 3\tabc\nA1\tNegated T1\n"
        assert parse_ann(serialize_ann(doc)) == doc

    def test_numeric_tid_ordering(self):
        doc = StandoffDoc(
            entities=(
                StandoffEntity("T10", "b", 5, 8, "xyz"),
                StandoffEntity("T2", "a", 0, 3, "abc"),
            )
        )
        lines = serialize_ann(doc).splitlines()
        assert lines[0].startswith("T2\t")
        assert lines[1].startswith("T10\t")

    def test_round_trip_byte_identity_on_canonical_file(self):
        canonical = (
            "T1\tchf 10 34\tcongestive heart failure\n"
            "T2\tnatriuretic_peptides 120 123\tBNP\n"
            "A1\tNegated T2\n"
        )
        assert serialize_ann(parse_ann(canonical)) == canonical


def _random_doc(rng: random.Random) -> StandoffDoc:
    n = rng.randint(0, 12)
    entities = []
    cursor = 0
    for i in range(1, n + 1):
        cursor += rng.randint(0, 5)
        length = rng.randint(1, 8)
        text = "".join(rng.choice("abcXYZ äé9-") for _ in range(length)).strip() or "x"
        entities.append(
            StandoffEntity(
                tid=f"T{i}",
                label=rng.choice(["chf", "rash", "Fever_1", "bnp-x"]),
                start=cursor,
                end=cursor + len(text),
                quoted_text=text,
            )
        )
        cursor += length
    attributes = tuple(
        StandoffAttribute(f"A{j + 1}", "Negated", f"T{rng.randint(1, n)}")
        for j in range(rng.randint(0, n // 2) if n else 0)
    )
    return StandoffDoc(entities=tuple(entities), attributes=attributes)


def test_structural_round_trip_generated_docs():
    rng = random.Random(31)
    for _ in range(200):
        doc = _random_doc(rng)
        assert parse_ann(serialize_ann(doc)) == doc


class TestMentionConversion:
    def test_affirmed_mention_no_attribute(self):
        note = note_of("BNP was 900")
        doc = mentions_to_doc([mention("bnp", 0, 3, note)])
        assert len(doc.entities) == 1
        assert doc.attributes == ()

    def test_negated_mention_gets_attribute(self):
        note = note_of("no BNP rise")
        doc = mentions_to_doc([mention("bnp", 3, 6, note, assertion="negated")])
        assert [a.name for a in doc.attributes] == ["Negated"]

    def test_round_trip_randomized(self, chf_kd_lexicon):
        rng = random.Random(17)
        words = ["BNP", "rash", "fever", "edema", "aspirin", "stable", "émigré"]
        for _ in range(100):
            note = note_of(" ".join(rng.choice(words) for _ in range(rng.randint(3, 20))))
            ids = [e.element_id for e in chf_kd_lexicon.elements]
            mentions = []
            pos = 0
            while pos < len(note.text) - 2 and len(mentions) < 8:
                end = min(len(note.text), pos + rng.randint(1, 6))
                surf = note.text[pos:end]
                if surf.strip() == surf and surf:
                    mentions.append(
                        mention(
                            rng.choice(ids), pos, end, note,
                            assertion=rng.choice(["affirmed", "negated"]),
                        )
                    )
                pos = end + rng.randint(1, 4)
            back = doc_to_mentions(mentions_to_doc(mentions), note, chf_kd_lexicon)
            key = lambda m: (m.element_id, m.start, m.end, m.surface, m.assertion)
            assert sorted(map(key, back)) == sorted(map(key, mentions))

    def test_non_ascii_offsets_are_characters(self):
        note = note_of("café BNP détecté")
        # offsets count characters, so BNP sits at [5,8) despite the é before it
        m = mention("bnp", 5, 8, note)
        assert m.surface == "BNP"
        doc = mentions_to_doc([m])
        assert doc.entities[0].start == 5
        text = serialize_ann(doc)
        back = doc_to_mentions(parse_ann(text), note)
        assert back[0].surface == "BNP"

    def test_note_mismatch(self):
        note = note_of("0123456789 text here")
        doc = StandoffDoc(entities=(StandoffEntity("T1", "chf", 0, 4, "WRONG"),))
        with pytest.raises(NoteMismatch):
            doc_to_mentions(doc, note)

    def test_span_past_note_end(self):
        note = note_of("short")
        doc = StandoffDoc(entities=(StandoffEntity("T1", "chf", 0, 50, "short"),))
        with pytest.raises(NoteMismatch):
            doc_to_mentions(doc, note)

    def test_unknown_label_with_lexicon(self):
        note = note_of("BNP")
        lexicon = tiny_lexicon(("bnp", "BNP", []))
        doc = StandoffDoc(entities=(StandoffEntity("T1", "xyz", 0, 3, "BNP"),))
        with pytest.raises(UnknownElement):
            doc_to_mentions(doc, note, lexicon)

    def test_mention_across_newline(self):
        note = note_of("congestive\nheart failure seen")
        m = mention("chf", 0, 24, note)
        doc = mentions_to_doc([m])
        assert "\n" not in doc.entities[0].quoted_text
        back = doc_to_mentions(parse_ann(serialize_ann(doc)), note)
        assert back[0].surface == note.text[0:24]
