"""Shared phrase-matching helpers.

A "word character" throughout the package is [A-Za-z0-9]; phrase matches are
case-insensitive and bounded by non-word characters wherever the phrase itself
starts or ends with a word character. Internal whitespace in a phrase matches
any whitespace run, so phrases cross line wraps inside a note.
"""

from __future__ import annotations

import re

_WORD_CHAR = "A-Za-z0-9"


def phrase_pattern(phrase: str) -> re.Pattern[str]:
    parts = phrase.split()
    if not parts:
        raise ValueError("empty phrase")
    body = r"\s+".join(re.escape(p) for p in parts)
    prefix = rf"(?<![{_WORD_CHAR}])" if re.match(rf"[{_WORD_CHAR}]", phrase.strip()) else ""
    suffix = rf"(?![{_WORD_CHAR}])" if re.search(rf"[{_WORD_CHAR}]$", phrase.strip()) else ""
    return re.compile(prefix + body + suffix, re.IGNORECASE)


def find_phrase(pattern: re.Pattern[str], text: str, offset: int = 0) -> list[tuple[int, int]]:
    """All (start, end) occurrences of a compiled phrase, shifted by offset."""
    return [(m.start() + offset, m.end() + offset) for m in pattern.finditer(text)]
