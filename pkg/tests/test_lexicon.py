from __future__ import annotations

import logging
import random
import re

import pytest

from clean.errors import BadPattern, DuplicateElementId, LexiconParseError
from clean.lexicon import (
    DEFAULT_LEXICON_PATH,
    compile_matchers,
    filter_by_prefix,
    load_lexicon,
    make_lexicon,
)

from conftest import tiny_lexicon


def _write_lexicon(tmp_path, lines):
    path = tmp_path / "lex.tsv"
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


class TestLoadLexicon:
    def test_shipped_file_has_87_elements(self, chf_kd_lexicon):
        assert len(chf_kd_lexicon) == 87
        assert sum(1 for e in chf_kd_lexicon.elements if e.category.startswith("CHF")) == 50
        assert sum(1 for e in chf_kd_lexicon.elements if e.category.startswith("KD")) == 37

    def test_empty_lexicon_is_valid_and_warns(self, tmp_path, caplog):
        path = _write_lexicon(tmp_path, ["# nothing here"])
        with caplog.at_level(logging.WARNING):
            lexicon = load_lexicon(path)
        assert len(lexicon) == 0
        assert any("no elements" in r.message for r in caplog.records)

    def test_duplicate_id(self, tmp_path):
        path = _write_lexicon(
            tmp_path,
            ["bnp\tBNP\tLabs", "bnp\tB-type natriuretic peptide\tLabs"],
        )
        with pytest.raises(DuplicateElementId):
            load_lexicon(path)

    def test_bad_pattern_names_element(self, tmp_path):
        path = _write_lexicon(tmp_path, ["ef\tEF\tLabs\t\t\t[unclosed"])
        with pytest.raises(BadPattern) as err:
            load_lexicon(path)
        assert "ef" in str(err.value)

    def test_parse_error_reports_line(self, tmp_path):
        path = _write_lexicon(tmp_path, ["good\tGood\tC", "lonely-field"])
        with pytest.raises(LexiconParseError) as err:
            load_lexicon(path)
        assert ":2:" in str(err.value)

    def test_bad_id_rejected(self, tmp_path):
        path = _write_lexicon(tmp_path, ["bad id!\tName\tC"])
        with pytest.raises(LexiconParseError):
            load_lexicon(path)

    def test_trailing_fields_optional(self, tmp_path):
        path = _write_lexicon(tmp_path, ["bnp\tBNP"])
        lexicon = load_lexicon(path)
        assert lexicon.get("bnp").synonyms == ()
        assert lexicon.get("bnp").concept_ids == ()

    def test_file_order_preserved(self, tmp_path):
        path = _write_lexicon(tmp_path, ["b\tBeta\tC", "a\tAlpha\tC"])
        assert [e.element_id for e in load_lexicon(path).elements] == ["b", "a"]


class TestFilterByPrefix:
    def test_prefix_n_over_shipped_lexicon(self, chf_kd_lexicon):
        # independent oracle: scan the shipped file directly
        expected = []
        for line in DEFAULT_LEXICON_PATH.read_text(encoding="utf-8").splitlines():
            if line.startswith("#") or not line.strip():
                continue
            name = line.split("\t")[1]
            if name.lower().startswith("n"):
                expected.append(name)
        assert sorted(expected) == ["NT-proBNP", "Natriuretic Peptides"]
        got = [e.name for e in filter_by_prefix(chf_kd_lexicon, "n")]
        assert sorted(got) == sorted(expected)

    def test_empty_prefix_returns_all(self, chf_kd_lexicon):
        assert len(filter_by_prefix(chf_kd_lexicon, "")) == 87

    def test_no_match(self, chf_kd_lexicon):
        assert filter_by_prefix(chf_kd_lexicon, "zzz") == []

    def test_grouped_by_category(self, chf_kd_lexicon):
        cats = [e.category for e in filter_by_prefix(chf_kd_lexicon, "")]
        order = {c: i for i, c in enumerate(chf_kd_lexicon.categories)}
        assert cats == sorted(cats, key=order.__getitem__)

    def test_monotone_in_prefix(self, chf_kd_lexicon):
        rng = random.Random(9)
        names = [e.name for e in chf_kd_lexicon.elements]
        for _ in range(100):
            name = rng.choice(names)
            cut = rng.randint(0, len(name) - 1)
            shorter = {e.element_id for e in filter_by_prefix(chf_kd_lexicon, name[:cut])}
            longer = {e.element_id for e in filter_by_prefix(chf_kd_lexicon, name[:cut + 1])}
            assert longer <= shorter


class TestMatchers:
    def test_whole_word_boundary(self):
        lexicon = tiny_lexicon(("natriuretic_peptides", "Natriuretic Peptides", ["BNP"]))
        matchers = compile_matchers(lexicon)
        assert matchers.find("BNP was elevated") == [("natriuretic_peptides", 0, 3)]
        assert matchers.find("BNPX was elevated") == []

    def test_hyphenated_synonym(self):
        lexicon = tiny_lexicon(("nt_probnp", "NT-proBNP", []))
        matchers = compile_matchers(lexicon)
        assert matchers.find("nt-probnp of 2000") == [("nt_probnp", 0, 9)]
        assert matchers.find("xnt-probnp") == []

    def test_regex_pattern(self):
        lexicon = tiny_lexicon(("ef", "Ejection Fraction", [], [r"EF\s*\d{1,2}%"]))
        matchers = compile_matchers(lexicon)
        hits = matchers.find("EF 35% on echo")
        assert ("ef", 0, 6) in hits

    def test_empty_lexicon_matches_nothing(self):
        matchers = compile_matchers(make_lexicon([]))
        assert matchers.find("BNP fever rash anything") == []

    def test_case_insensitive_identical_spans(self):
        lexicon = tiny_lexicon(("bnp", "BNP", []))
        matchers = compile_matchers(lexicon)
        lower = matchers.find("the bnp result")
        upper = matchers.find("the BNP result")
        assert lower == upper == [("bnp", 4, 7)]

    def test_deterministic_across_loads(self, tmp_path):
        lines = ["bnp\tBNP\tLabs\t\tbrain natriuretic peptide", "ef\tEF\tLabs\t\t\tEF\\s*\\d+%"]
        p1 = _write_lexicon(tmp_path, lines)
        text = "BNP high, EF 20%, brain natriuretic peptide rechecked"
        first = compile_matchers(load_lexicon(p1)).find(text)
        second = compile_matchers(load_lexicon(p1)).find(text)
        assert first == second

    def test_shipped_patterns_all_compile(self, chf_kd_lexicon):
        matchers = compile_matchers(chf_kd_lexicon)
        assert matchers.find("EF 35% with pedal edema, on Lasix") != []
