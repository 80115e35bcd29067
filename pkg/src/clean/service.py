"""HTTP API over an open project, consumed by the browser client.

Routes (JSON bodies): GET /api/notes, GET /api/notes/{id},
PUT /api/notes/{id}/annotations, POST /api/notes/{id}/recheck,
POST /api/events, GET /api/lexicon. The annotating user is taken from the
X-User header. 400 = validation, 404 = unknown note, 409 = stale revision.
"""

from __future__ import annotations

from pathlib import Path

from fastapi import FastAPI, Header, HTTPException, Request
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, Field

from .errors import (
    CleanError,
    ConflictingRevision,
    InvalidMention,
    NonMonotoneTimestamps,
    NotComplete,
    UnknownNote,
)
from .extractor import Mention
from .lexicon import filter_by_prefix
from .project import InteractionEvent, NoteStatus, Project


class MentionBody(BaseModel):
    element_id: str
    start: int
    end: int
    surface: str
    assertion: str = "affirmed"
    source: str = "human"


class SaveBody(BaseModel):
    mentions: list[MentionBody]
    base_revision: int
    mark_complete: bool = False


class EventBody(BaseModel):
    timestamp_ms: int
    user: str
    note_id: str
    kind: str
    detail: str = ""


class EventsBody(BaseModel):
    events: list[EventBody] = Field(default_factory=list)


def _status_json(s: NoteStatus) -> dict:
    return {
        "note_id": s.note_id,
        "file_name": f"{s.note_id}.txt",
        "state": s.state,
        "annotation_count": s.annotation_count,
        "last_reviewed_by": s.last_reviewed_by,
        "last_updated": s.last_updated,
        "revision": s.revision,
    }


def _mention_json(m: Mention) -> dict:
    return {
        "element_id": m.element_id,
        "start": m.start,
        "end": m.end,
        "surface": m.surface,
        "assertion": m.assertion,
        "source": m.source,
    }


def create_app(project: Project, static_dir: str | Path | None = None) -> FastAPI:
    app = FastAPI(title="clean annotation service")

    @app.get("/api/notes")
    def list_notes(q: str | None = None) -> dict:
        rows, complete, incomplete = project.list_notes(q)
        return {
            "notes": [_status_json(s) for s in rows],
            "complete_count": complete,
            "incomplete_count": incomplete,
            "total": complete + incomplete,
        }

    @app.get("/api/notes/{note_id}")
    def get_note(note_id: str) -> dict:
        try:
            view = project.get_note(note_id)
        except UnknownNote:
            raise HTTPException(status_code=404, detail=f"unknown note {note_id!r}")
        return {
            "note_id": view.note.id,
            "text": view.note.text,
            "word_count": view.note.word_count,
            "sentences": [
                {"index": s.index, "start": s.start, "end": s.end} for s in view.sentences
            ],
            "mentions": [_mention_json(m) for m in view.mentions],
            "status": _status_json(view.status),
        }

    @app.put("/api/notes/{note_id}/annotations")
    def save_annotations(
        note_id: str,
        body: SaveBody,
        x_user: str = Header(default="anonymous"),
    ) -> dict:
        mentions = [
            Mention(
                element_id=m.element_id,
                start=m.start,
                end=m.end,
                surface=m.surface,
                assertion="negated" if m.assertion == "negated" else "affirmed",
                source=m.source,
            )
            for m in body.mentions
        ]
        try:
            result = project.save_annotations(
                note_id, mentions, body.mark_complete, x_user, body.base_revision
            )
        except UnknownNote:
            raise HTTPException(status_code=404, detail=f"unknown note {note_id!r}")
        except ConflictingRevision as exc:
            raise HTTPException(status_code=409, detail=str(exc))
        except InvalidMention as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        return {"status": _status_json(result.status), "next_note_id": result.next_note_id}

    @app.post("/api/notes/{note_id}/recheck")
    def recheck(note_id: str) -> dict:
        try:
            status = project.recheck(note_id)
        except UnknownNote:
            raise HTTPException(status_code=404, detail=f"unknown note {note_id!r}")
        except NotComplete as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        return {"status": _status_json(status)}

    @app.post("/api/events")
    def log_events(body: EventsBody) -> dict:
        try:
            events = [
                InteractionEvent(e.timestamp_ms, e.user, e.note_id, e.kind, e.detail)
                for e in body.events
            ]
            appended = project.log_events(events)
        except (NonMonotoneTimestamps, ValueError) as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        except UnknownNote as exc:
            raise HTTPException(status_code=404, detail=f"unknown note {exc}")
        return {"appended": appended}

    @app.get("/api/lexicon")
    def lexicon(prefix: str = "") -> dict:
        elements = filter_by_prefix(project.lexicon, prefix)
        return {
            "categories": list(project.lexicon.categories),
            "elements": [
                {
                    "element_id": el.element_id,
                    "name": el.name,
                    "category": el.category,
                    "concept_ids": list(el.concept_ids),
                    "synonyms": list(el.synonyms),
                }
                for el in elements
            ],
        }

    @app.exception_handler(CleanError)
    def clean_error(_: Request, exc: CleanError) -> JSONResponse:
        # fallback for anything a route did not map explicitly
        return JSONResponse(status_code=400, content={"detail": str(exc)})

    if static_dir is not None and Path(static_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="ui")

    return app
