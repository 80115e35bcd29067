from __future__ import annotations

import os

import pytest

from clean.errors import (
    ConflictingRevision,
    CorpusEmpty,
    InvalidMention,
    NonMonotoneTimestamps,
    NotComplete,
    RefusedExistingProject,
    UnknownNote,
)
from clean.extractor import Mention
from clean.lexicon import DEFAULT_LEXICON_PATH
from clean.project import InteractionEvent, Project

from conftest import mention

NOTE_TEXTS = {
    "alpha-note": "Denies chest pain. BNP elevated to 900.",
    "bravo-note": "No rash or fever today.\n\nEF 35% on echo.",
    "charlie-note": "Aspirin started. IVIG given for Kawasaki disease.",
    "delta-discharge": "Stable. No edema.",
}


@pytest.fixture
def corpus_dir(tmp_path):
    d = tmp_path / "corpus"
    d.mkdir()
    for note_id, text in NOTE_TEXTS.items():
        (d / f"{note_id}.txt").write_text(text, encoding="utf-8")
    return d


@pytest.fixture
def project(tmp_path, corpus_dir) -> Project:
    return Project.init(tmp_path / "proj", corpus_dir, DEFAULT_LEXICON_PATH)


def _save(project, note_id, mentions, complete=True, user="tim", rev=None):
    if rev is None:
        rev = project.get_note(note_id).status.revision
    return project.save_annotations(note_id, mentions, complete, user, rev)


class TestInit:
    def test_all_incomplete_with_preannotation_counts(self, project):
        rows, complete, incomplete = project.list_notes()
        assert len(rows) == 4
        assert (complete, incomplete) == (0, 4)
        counts = {s.note_id: s.annotation_count for s in rows}
        assert counts["alpha-note"] >= 2  # chest pain + BNP
        view = project.get_note("alpha-note")
        assert len(view.mentions) == counts["alpha-note"]

    def test_twenty_note_project(self, tmp_path):
        d = tmp_path / "c20"
        d.mkdir()
        for i in range(20):
            (d / f"note-{i:02d}.txt").write_text("BNP high. No rash.", encoding="utf-8")
        project = Project.init(tmp_path / "p20", d, DEFAULT_LEXICON_PATH)
        rows, complete, incomplete = project.list_notes()
        assert (len(rows), complete, incomplete) == (20, 0, 20)
        assert all(s.state == "incomplete" for s in rows)

    def test_empty_preannotation_dir_gives_zero_counts(self, tmp_path, corpus_dir):
        empty_pre = tmp_path / "pre"
        empty_pre.mkdir()
        project = Project.init(tmp_path / "proj2", corpus_dir, DEFAULT_LEXICON_PATH, pre_dir=empty_pre)
        rows, _, _ = project.list_notes()
        assert all(s.annotation_count == 0 for s in rows)

    def test_refuses_existing_without_force(self, tmp_path, corpus_dir, project):
        with pytest.raises(RefusedExistingProject):
            Project.init(project.root, corpus_dir, DEFAULT_LEXICON_PATH)
        Project.init(project.root, corpus_dir, DEFAULT_LEXICON_PATH, force=True)

    def test_empty_corpus(self, tmp_path):
        empty = tmp_path / "empty"
        empty.mkdir()
        with pytest.raises(CorpusEmpty):
            Project.init(tmp_path / "p", empty, DEFAULT_LEXICON_PATH)


class TestListAndGet:
    def test_filter_by_filename_substring(self, project):
        rows, complete, incomplete = project.list_notes("discharge")
        assert [s.note_id for s in rows] == ["delta-discharge"]
        assert complete + incomplete == 4  # counts stay global

    def test_get_unknown_note(self, project):
        with pytest.raises(UnknownNote):
            project.get_note("missing")

    def test_fresh_note_serves_preannotations(self, project):
        view = project.get_note("alpha-note")
        assert all(m.source == "pre" for m in view.mentions)
        by_id = {m.element_id: m.assertion for m in view.mentions}
        assert by_id["chest_pain"] == "negated"

    def test_read_your_writes(self, project):
        view = project.get_note("alpha-note")
        keep = [m for m in view.mentions if m.element_id == "natriuretic_peptides"]
        keep = [Mention(m.element_id, m.start, m.end, m.surface, m.assertion, "human") for m in keep]
        _save(project, "alpha-note", keep, complete=False)
        after = project.get_note("alpha-note")
        assert [(m.element_id, m.start, m.end) for m in after.mentions] == [
            (m.element_id, m.start, m.end) for m in keep
        ]
        assert after.status.annotation_count == len(keep)


class TestSave:
    def test_complete_advances_to_next_incomplete(self, project):
        result = _save(project, "bravo-note", [])
        assert result.status.state == "complete"
        assert result.next_note_id == "charlie-note"

    def test_wraps_past_end(self, project):
        for nid in ["charlie-note", "delta-discharge"]:
            _save(project, nid, [])
        result = _save(project, "bravo-note", [])
        assert result.next_note_id == "alpha-note"

    def test_last_incomplete_returns_absent(self, project):
        for nid in ["alpha-note", "bravo-note", "charlie-note"]:
            _save(project, nid, [])
        result = _save(project, "delta-discharge", [])
        assert result.next_note_id is None

    def test_incomplete_save_keeps_state(self, project):
        result = _save(project, "alpha-note", [], complete=False)
        assert result.status.state == "incomplete"
        assert result.next_note_id == "bravo-note"

    def test_invalid_mention_out_of_bounds(self, project):
        bad = Mention("chf", 0, 10_000, "x", "affirmed", "human")
        with pytest.raises(InvalidMention):
            _save(project, "alpha-note", [bad])

    def test_invalid_mention_unknown_element(self, project):
        bad = Mention("not_an_element", 0, 3, "Den", "affirmed", "human")
        with pytest.raises(InvalidMention):
            _save(project, "alpha-note", [bad])

    def test_invalid_mention_surface_mismatch(self, project):
        bad = Mention("chf", 0, 3, "XXX", "affirmed", "human")
        with pytest.raises(InvalidMention):
            _save(project, "alpha-note", [bad])

    def test_stale_revision_conflict(self, project):
        _save(project, "alpha-note", [], complete=False)
        with pytest.raises(ConflictingRevision):
            project.save_annotations("alpha-note", [], False, "tim", 0)

    def test_revision_increments_and_reviewer_recorded(self, project):
        result = _save(project, "alpha-note", [], complete=False, user="jina")
        assert result.status.revision == 1
        assert result.status.last_reviewed_by == "jina"
        assert result.status.last_updated != ""

    def test_unknown_note(self, project):
        with pytest.raises(UnknownNote):
            project.save_annotations("nope", [], False, "tim", 0)


class TestRecheck:
    def test_round_trip(self, project):
        _save(project, "alpha-note", [])
        status = project.recheck("alpha-note")
        assert status.state == "incomplete"
        assert status.annotation_count == 0  # annotations untouched (empty set saved)
        _, complete, incomplete = project.list_notes()
        assert (complete, incomplete) == (0, 4)
        result = _save(project, "alpha-note", [], rev=status.revision)
        assert result.status.state == "complete"

    def test_recheck_keeps_annotations(self, project):
        view = project.get_note("alpha-note")
        kept = [Mention(m.element_id, m.start, m.end, m.surface, m.assertion, "human")
                for m in view.mentions]
        _save(project, "alpha-note", kept)
        project.recheck("alpha-note")
        after = project.get_note("alpha-note")
        assert len(after.mentions) == len(kept)

    def test_recheck_incomplete_rejected(self, project):
        with pytest.raises(NotComplete):
            project.recheck("alpha-note")


class TestPersistence:
    def test_reopen_round_trip(self, project):
        view = project.get_note("alpha-note")
        kept = [Mention(m.element_id, m.start, m.end, m.surface, m.assertion, "human")
                for m in view.mentions][:1]
        _save(project, "alpha-note", kept, user="rob")
        _save(project, "charlie-note", [], complete=False)

        reopened = Project(project.root)
        assert reopened.note_order == project.note_order
        for nid in project.note_order:
            a, b = project.get_note(nid), reopened.get_note(nid)
            assert a.status == b.status
            assert [(m.element_id, m.start, m.end, m.assertion) for m in a.mentions] == [
                (m.element_id, m.start, m.end, m.assertion) for m in b.mentions
            ]

    def test_counts_always_total(self, project):
        import random

        rng = random.Random(3)
        ids = list(NOTE_TEXTS)
        for _ in range(25):
            nid = rng.choice(ids)
            state = project.get_note(nid).status.state
            if state == "complete" and rng.random() < 0.5:
                project.recheck(nid)
            else:
                _save(project, nid, [], complete=rng.random() < 0.5)
            _, complete, incomplete = project.list_notes()
            assert complete + incomplete == len(ids)

    def test_interrupted_save_preserves_previous_revision(self, project, monkeypatch):
        before = project.get_note("alpha-note")
        original_mentions = [(m.element_id, m.start, m.end) for m in before.mentions]

        real_replace = os.replace

        def explode(src, dst):
            raise OSError("simulated crash before rename")

        monkeypatch.setattr("clean.project.os.replace", explode)
        with pytest.raises(OSError):
            _save(project, "alpha-note", [])
        monkeypatch.setattr("clean.project.os.replace", real_replace)

        reopened = Project(project.root)
        after = reopened.get_note("alpha-note")
        assert after.status.revision == 0
        assert after.status.state == "incomplete"
        assert [(m.element_id, m.start, m.end) for m in after.mentions] == original_mentions


class TestEvents:
    def _batch(self, *ts, user="tim", kind="key"):
        return [InteractionEvent(t, user, "alpha-note", kind) for t in ts]

    def test_append_count(self, project):
        assert project.log_events(self._batch(1, 2, 3)) == 3
        assert project.log_events([]) == 0

    def test_out_of_order_batch_rejected(self, project):
        with pytest.raises(NonMonotoneTimestamps):
            project.log_events(self._batch(5, 4))

    def test_equal_timestamps_allowed(self, project):
        assert project.log_events(self._batch(5, 5)) == 2

    def test_append_only_prefix(self, project):
        project.log_events(self._batch(1, 2))
        path = project.root / "events" / "tim.log"
        first = path.read_bytes()
        project.log_events(self._batch(3, 4))
        second = path.read_bytes()
        assert second.startswith(first)

    def test_round_trip_and_kinds(self, project):
        events = [
            InteractionEvent(10, "tim", "alpha-note", "mouse", "click 3,4"),
            InteractionEvent(20, "tim", "alpha-note", "pause"),
            InteractionEvent(30, "tim", "alpha-note", "resume"),
            InteractionEvent(40, "tim", "alpha-note", "save", "rev 1"),
        ]
        project.log_events(events)
        assert project.read_events("tim") == events

    def test_unknown_kind_rejected(self):
        with pytest.raises(ValueError):
            InteractionEvent(1, "tim", "n", "scroll")

    def test_unknown_note_rejected(self, project):
        with pytest.raises(UnknownNote):
            project.log_events([InteractionEvent(1, "tim", "ghost", "key")])
