"""File-backed annotation project store.

Layout under the project root:

    notes/<id>.txt    normalized note text
    pre/<id>.ann      immutable machine pre-annotations
    ann/<id>.ann      current saved annotations (absent until first save)
    status.tsv        one row per note, in project order
    events/<user>.log append-only interaction log
    lexicon.tsv       copy of the lexicon the project was created with

Every file write goes through a temp-file + rename, so an interrupted save
leaves the previous revision intact. Mutations are serialized by a project
lock; reads hand out snapshots.
"""

from __future__ import annotations

import logging
import os
import shutil
import threading
from dataclasses import dataclass, replace
from datetime import datetime, timezone
from pathlib import Path
from typing import Sequence

from .corpus import ClinicalNote, SentenceSpan, load_corpus, split_sentences
from .ensemble import EnsembleConfig, ToolOutput, ensemble_merge, import_tool_output
from .errors import (
    ConflictingRevision,
    CorpusEmpty,
    InvalidMention,
    NonMonotoneTimestamps,
    NotComplete,
    RefusedExistingProject,
    UnknownNote,
)
from .extractor import (
    AnnotationSet,
    Mention,
    NegationLexicon,
    annotate,
    load_negation_lexicon,
)
from .lexicon import Lexicon, compile_matchers, load_lexicon
from .standoff import doc_to_mentions, mentions_to_doc, parse_ann, serialize_ann

log = logging.getLogger(__name__)

EVENT_KINDS = ("key", "mouse", "pause", "resume", "save", "complete")

STATE_INCOMPLETE = "incomplete"
STATE_COMPLETE = "complete"


@dataclass(frozen=True)
class InteractionEvent:
    timestamp_ms: int
    user: str
    note_id: str
    kind: str
    detail: str = ""

    def __post_init__(self) -> None:
        if self.kind not in EVENT_KINDS:
            raise ValueError(f"unknown event kind {self.kind!r}")


@dataclass(frozen=True)
class NoteStatus:
    note_id: str
    state: str
    annotation_count: int
    last_reviewed_by: str
    last_updated: str
    revision: int


@dataclass(frozen=True)
class NoteView:
    note: ClinicalNote
    sentences: tuple[SentenceSpan, ...]
    mentions: tuple[Mention, ...]
    status: NoteStatus
    lexicon: Lexicon


@dataclass(frozen=True)
class SaveResult:
    status: NoteStatus
    next_note_id: str | None


def _now_iso() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def _atomic_write_text(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)


def _status_line(s: NoteStatus) -> str:
    return "\t".join(
        [s.note_id, s.state, str(s.annotation_count), s.last_reviewed_by, s.last_updated, str(s.revision)]
    )


def _parse_status_line(line: str) -> NoteStatus:
    parts = line.split("\t")
    if len(parts) != 6:
        raise ValueError(f"bad status row: {line!r}")
    return NoteStatus(
        note_id=parts[0],
        state=parts[1],
        annotation_count=int(parts[2]),
        last_reviewed_by=parts[3],
        last_updated=parts[4],
        revision=int(parts[5]),
    )


class Project:
    """An open annotation project; one instance per project directory."""

    def __init__(self, root: str | Path):
        self.root = Path(root)
        if not (self.root / "status.tsv").exists():
            raise FileNotFoundError(f"{self.root} is not a project (no status.tsv)")
        self.lexicon = load_lexicon(self.root / "lexicon.tsv")
        self._lock = threading.RLock()

        self._statuses: dict[str, NoteStatus] = {}
        self.note_order: list[str] = []
        for line in (self.root / "status.tsv").read_text(encoding="utf-8").splitlines():
            if not line.strip():
                continue
            status = _parse_status_line(line)
            self._statuses[status.note_id] = status
            self.note_order.append(status.note_id)

        self._notes: dict[str, ClinicalNote] = {}
        self._sentences: dict[str, tuple[SentenceSpan, ...]] = {}
        for note_id in self.note_order:
            text = (self.root / "notes" / f"{note_id}.txt").read_text(encoding="utf-8")
            note = ClinicalNote(id=note_id, text=text, word_count=len(text.split()))
            self._notes[note_id] = note
            self._sentences[note_id] = tuple(split_sentences(note))

    # --- creation ---

    @classmethod
    def init(
        cls,
        root: str | Path,
        corpus_dir: str | Path,
        lexicon_file: str | Path,
        pre_dir: str | Path | None = None,
        neg: NegationLexicon | None = None,
        force: bool = False,
    ) -> "Project":
        """Create a project; pre_dir=None runs the built-in pipeline."""
        root = Path(root)
        if (root / "status.tsv").exists() and not force:
            raise RefusedExistingProject(f"{root} already holds a project (use force)")

        corpus = load_corpus(corpus_dir)
        if not corpus.notes:
            raise CorpusEmpty(f"no .txt notes under {corpus_dir}")
        lexicon = load_lexicon(lexicon_file)

        for sub in ("notes", "pre", "ann", "events"):
            (root / sub).mkdir(parents=True, exist_ok=True)
        shutil.copyfile(lexicon_file, root / "lexicon.tsv")

        neg = neg or load_negation_lexicon()
        now = _now_iso()
        rows = []
        for note in corpus.notes:
            if pre_dir is not None:
                pre_path = Path(pre_dir) / f"{note.id}.ann"
                ann_text = pre_path.read_text(encoding="utf-8") if pre_path.exists() else ""
                mentions = doc_to_mentions(parse_ann(ann_text), note, lexicon, source="pre")
            else:
                mentions = list(annotate(note, lexicon, neg).mentions)
            _atomic_write_text(root / "notes" / f"{note.id}.txt", note.text)
            _atomic_write_text(root / "pre" / f"{note.id}.ann", serialize_ann(mentions_to_doc(mentions)))
            rows.append(
                NoteStatus(
                    note_id=note.id,
                    state=STATE_INCOMPLETE,
                    annotation_count=len(mentions),
                    last_reviewed_by="",
                    last_updated=now,
                    revision=0,
                )
            )
        _atomic_write_text(root / "status.tsv", "".join(_status_line(r) + "\n" for r in rows))
        return cls(root)

    # --- reads ---

    def _require(self, note_id: str) -> NoteStatus:
        try:
            return self._statuses[note_id]
        except KeyError:
            raise UnknownNote(note_id) from None

    def current_mentions(self, note_id: str) -> tuple[Mention, ...]:
        """Saved annotations if any, else the pre-annotation set."""
        status = self._require(note_id)
        note = self._notes[note_id]
        ann_path = self.root / "ann" / f"{note_id}.ann"
        if ann_path.exists():
            doc = parse_ann(ann_path.read_text(encoding="utf-8"))
            return tuple(doc_to_mentions(doc, note, self.lexicon, source="human"))
        pre_path = self.root / "pre" / f"{note_id}.ann"
        if pre_path.exists():
            doc = parse_ann(pre_path.read_text(encoding="utf-8"))
            return tuple(doc_to_mentions(doc, note, self.lexicon, source="pre"))
        return ()

    def get_note(self, note_id: str) -> NoteView:
        status = self._require(note_id)
        return NoteView(
            note=self._notes[note_id],
            sentences=self._sentences[note_id],
            mentions=self.current_mentions(note_id),
            status=status,
            lexicon=self.lexicon,
        )

    def list_notes(self, q: str | None = None) -> tuple[list[NoteStatus], int, int]:
        """Ordered statuses (optionally filename-filtered) plus global counts."""
        complete = sum(1 for s in self._statuses.values() if s.state == STATE_COMPLETE)
        incomplete = len(self._statuses) - complete
        rows = [self._statuses[i] for i in self.note_order]
        if q:
            rows = [s for s in rows if q.lower() in f"{s.note_id}.txt".lower()]
        return rows, complete, incomplete

    # --- mutations ---

    def _validate_mentions(self, note: ClinicalNote, mentions: Sequence[Mention]) -> list[Mention]:
        checked = []
        for m in mentions:
            label = f"{m.element_id} [{m.start},{m.end})"
            if m.element_id not in self.lexicon:
                raise InvalidMention(f"{label}: unknown element id")
            if m.start < 0 or m.end > len(note.text) or m.start >= m.end:
                raise InvalidMention(f"{label}: span outside note of length {len(note.text)}")
            if m.surface != note.text[m.start:m.end]:
                raise InvalidMention(
                    f"{label}: surface {m.surface!r} != note slice {note.text[m.start:m.end]!r}"
                )
            checked.append(m)
        return sorted(checked, key=Mention.sort_key)

    def _write_statuses(self) -> None:
        rows = (self._statuses[i] for i in self.note_order)
        _atomic_write_text(self.root / "status.tsv", "".join(_status_line(r) + "\n" for r in rows))

    def _next_incomplete(self, after: str) -> str | None:
        order = self.note_order
        start = order.index(after)
        for offset in range(1, len(order) + 1):
            candidate = order[(start + offset) % len(order)]
            if self._statuses[candidate].state == STATE_INCOMPLETE:
                return candidate
        return None

    def save_annotations(
        self,
        note_id: str,
        mentions: Sequence[Mention],
        mark_complete: bool,
        user: str,
        base_revision: int,
    ) -> SaveResult:
        with self._lock:
            status = self._require(note_id)
            if base_revision != status.revision:
                raise ConflictingRevision(
                    f"{note_id}: base revision {base_revision} != current {status.revision}"
                )
            note = self._notes[note_id]
            clean = self._validate_mentions(note, mentions)

            _atomic_write_text(
                self.root / "ann" / f"{note_id}.ann",
                serialize_ann(mentions_to_doc(clean)),
            )
            new_status = NoteStatus(
                note_id=note_id,
                state=STATE_COMPLETE if mark_complete else STATE_INCOMPLETE,
                annotation_count=len(clean),
                last_reviewed_by=user,
                last_updated=_now_iso(),
                revision=status.revision + 1,
            )
            self._statuses[note_id] = new_status
            self._write_statuses()
            return SaveResult(status=new_status, next_note_id=self._next_incomplete(note_id))

    def recheck(self, note_id: str) -> NoteStatus:
        with self._lock:
            status = self._require(note_id)
            if status.state != STATE_COMPLETE:
                raise NotComplete(f"{note_id} is {status.state}")
            new_status = replace(status, state=STATE_INCOMPLETE, last_updated=_now_iso())
            self._statuses[note_id] = new_status
            self._write_statuses()
            return new_status

    def log_events(self, events: Sequence[InteractionEvent]) -> int:
        """Append a batch to the per-user logs; durable before returning."""
        if not events:
            return 0
        for a, b in zip(events, events[1:]):
            if b.timestamp_ms < a.timestamp_ms:
                raise NonMonotoneTimestamps(
                    f"timestamp {b.timestamp_ms} after {a.timestamp_ms}"
                )
        for ev in events:
            self._require(ev.note_id)
        with self._lock:
            by_user: dict[str, list[InteractionEvent]] = {}
            for ev in events:
                by_user.setdefault(ev.user, []).append(ev)
            for user, batch in by_user.items():
                path = self.root / "events" / f"{user}.log"
                with open(path, "a", encoding="utf-8") as fh:
                    for ev in batch:
                        detail = ev.detail.replace("\t", " ").replace("\n", " ")
                        fh.write(
                            f"{ev.timestamp_ms}\t{ev.user}\t{ev.note_id}\t{ev.kind}\t{detail}\n"
                        )
                    fh.flush()
                    os.fsync(fh.fileno())
        return len(events)

    def read_events(self, user: str) -> list[InteractionEvent]:
        path = self.root / "events" / f"{user}.log"
        if not path.exists():
            return []
        out = []
        for line in path.read_text(encoding="utf-8").splitlines():
            ts, who, note_id, kind, detail = line.split("\t", 4)
            out.append(InteractionEvent(int(ts), who, note_id, kind, detail))
        return out


def run_preannotation(
    corpus_dir: str | Path,
    lexicon: Lexicon,
    out_dir: str | Path,
    tools_dir: str | Path | None = None,
    cfg: EnsembleConfig | None = None,
    neg: NegationLexicon | None = None,
) -> list[AnnotationSet]:
    """Pre-annotate a corpus: built-in tagger unioned with external tool files.

    External outputs are read from <tools_dir>/<tool>/<note-id>.ann; a missing
    file means that tool found nothing in that note. One .ann per note is
    written under out_dir.
    """
    corpus = load_corpus(corpus_dir)
    if not corpus.notes:
        raise CorpusEmpty(f"no .txt notes under {corpus_dir}")
    cfg = cfg or EnsembleConfig()
    neg = neg or load_negation_lexicon()
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    tool_names: list[str] = []
    if tools_dir is not None:
        tool_names = sorted(p.name for p in Path(tools_dir).iterdir() if p.is_dir())

    results = []
    matchers = compile_matchers(lexicon)
    for note in corpus.notes:
        rock = annotate(note, lexicon, neg, matchers=matchers)
        outputs = [ToolOutput(tool_name="rock", note_id=note.id, mentions=rock.mentions)]
        for tool in tool_names:
            path = Path(tools_dir) / tool / f"{note.id}.ann"
            ann_text = path.read_text(encoding="utf-8") if path.exists() else ""
            outputs.append(import_tool_output(ann_text, note, tool, lexicon))
        merged = ensemble_merge(outputs, cfg)
        _atomic_write_text(out_dir / f"{note.id}.ann", serialize_ann(mentions_to_doc(list(merged.mentions))))
        results.append(merged)
    return results
