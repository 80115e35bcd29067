"""Exception types shared across the clean package."""

from __future__ import annotations


class CleanError(Exception):
    """Base class for all errors raised by this package."""


# --- corpus ---

class EmptyNote(CleanError):
    """Raised when a note file is empty or contains only whitespace."""


class EmptyCorpus(CleanError):
    """Raised when an operation requires at least one note."""


# init_project uses this name for the same condition
CorpusEmpty = EmptyCorpus


class QuerySyntaxError(CleanError):
    """Malformed boolean keyword query; carries the character position."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class MissingStratumLabel(CleanError):
    """A note passed to stratified_split has no stratum label."""


# --- lexicon ---

class LexiconParseError(CleanError):
    """Lexicon file could not be parsed; message includes line number."""


class DuplicateElementId(CleanError):
    """Two lexicon records share the same element id."""


class BadPattern(CleanError):
    """A lexicon regex pattern failed to compile."""


# --- standoff ---

class StandoffParseError(CleanError):
    """Standoff document line could not be parsed; message includes line number."""


class DuplicateId(CleanError):
    """Duplicate entity or attribute id within one standoff document."""


class NoteMismatch(CleanError):
    """Quoted text of an annotation disagrees with the note slice it points at."""


class UnknownElement(CleanError):
    """An annotation label does not resolve to any lexicon element."""


# --- ensemble ---

class MixedNotes(CleanError):
    """Tool outputs passed to a merge refer to different notes."""


# --- evaluation ---

class SpanOutOfBounds(CleanError):
    """A mention span falls outside the note text."""


class SentenceGapError(CleanError):
    """A mention start offset falls outside every sentence span."""


class EmptyInput(CleanError):
    """An aggregate was requested over zero scores."""


class ZeroWords(CleanError):
    """Per-word normalization requested with a zero word count."""


class NoEvents(CleanError):
    """Annotation time requested over an empty event log."""


# --- project service ---

class UnknownNote(CleanError):
    """The requested note id is not part of the project."""


class InvalidMention(CleanError):
    """A submitted mention violates span bounds, surface, or element checks."""


class ConflictingRevision(CleanError):
    """The client's base revision is stale; reload before saving."""


class NotComplete(CleanError):
    """Recheck requested for a note that is not in the complete state."""


class NonMonotoneTimestamps(CleanError):
    """An event batch contains decreasing timestamps."""


class RefusedExistingProject(CleanError):
    """init refused to overwrite an existing project without force."""
