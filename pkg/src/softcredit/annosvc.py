"""Local HTTP service feeding candidate pairs to human annotators.

Queues serve each annotator the candidates they have not labeled yet,
highest similarity first; labels persist in the graph store so nothing
is lost across restarts.  Agreement between annotators is reported as
Cohen's kappa over doubly-labeled candidates, with the disagreeing
pairs listed for resolution.
"""

from __future__ import annotations

import json
import uuid
from datetime import datetime, timezone
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.responses import FileResponse, JSONResponse
from fastapi.staticfiles import StaticFiles

from .errors import (
    InsufficientOverlap,
    SessionClosed,
    UnknownCandidate,
    ValidationError,
)
from .graphstore import GraphStore
from .stats import cohens_kappa

VALID_LABELS = ("match", "non_match", "unclear")


class AnnotationService:
    """Store-backed session, label, and agreement operations."""

    def __init__(self, store: GraphStore):
        self.store = store

    # --- sessions -----------------------------------------------------------

    def open_session(self, annotator_id: str, limit: int | None = None) -> dict:
        """Queue every candidate this annotator has not labeled, ordered
        by similarity descending with candidate id as the tie-break."""
        rows = self.store.sql(
            """
            SELECT cd.id, cd.similarity
            FROM candidates cd
            WHERE cd.id NOT IN (
                SELECT candidate_id FROM annotation_labels
                WHERE annotator_id = ? AND superseded = 0
            )
            ORDER BY cd.similarity DESC, cd.id ASC
            """,
            (annotator_id,),
        )
        queue = [r["id"] for r in rows]
        if limit is not None:
            queue = queue[:limit]
        session_id = uuid.uuid4().hex[:12]
        self.store.execute(
            "INSERT INTO annotation_sessions (session_id, annotator_id, queue, cursor)"
            " VALUES (?, ?, ?, 0)",
            (session_id, annotator_id, json.dumps(queue)),
        )
        return {"session_id": session_id, "annotator_id": annotator_id,
                "queue_size": len(queue)}

    def _session(self, session_id: str) -> dict:
        rows = self.store.sql(
            "SELECT * FROM annotation_sessions WHERE session_id = ?", (session_id,)
        )
        if not rows:
            raise SessionClosed(f"unknown session: {session_id}")
        row = rows[0]
        return {
            "session_id": row["session_id"],
            "annotator_id": row["annotator_id"],
            "queue": json.loads(row["queue"]),
            "cursor": row["cursor"],
        }

    def next_pair(self, session_id: str) -> dict:
        session = self._session(session_id)
        queue, cursor = session["queue"], session["cursor"]
        if cursor >= len(queue):
            return {"done": True, "labeled": cursor, "remaining": 0}
        candidate = self._candidate_view(queue[cursor])
        return {
            "done": False,
            "candidate": candidate,
            "position": cursor,
            "labeled": cursor,
            "remaining": len(queue) - cursor,
        }

    def _candidate_view(self, candidate_id: int) -> dict:
        rows = self.store.sql(
            """
            SELECT cd.id, cd.similarity,
                   au.author_id, au.display_name AS author_name, aa.position,
                   c.dev_id, c.username, c.display_name AS dev_name, c.email,
                   ar.title AS article_title
            FROM candidates cd
            JOIN pairs p ON p.id = cd.pair_id
            JOIN articles ar ON ar.id = p.article_id
            JOIN authors au ON au.id = cd.author_id
            JOIN contributors c ON c.id = cd.contributor_id
            LEFT JOIN article_authors aa
                ON aa.article_id = p.article_id AND aa.author_id = cd.author_id
            WHERE cd.id = ?
            """,
            (candidate_id,),
        )
        if not rows:
            raise UnknownCandidate(f"unknown candidate: {candidate_id}")
        row = rows[0]
        return {
            "candidate_id": row["id"],
            "similarity": row["similarity"],
            "author": {
                "author_id": row["author_id"],
                "display_name": row["author_name"],
                "position": row["position"],
            },
            "developer": {
                "dev_id": row["dev_id"],
                "username": row["username"],
                "display_name": row["dev_name"],
                "email": row["email"],
            },
            "article_title": row["article_title"],
        }

    # --- labels ---------------------------------------------------------------

    def submit_label(
        self,
        candidate_id: int,
        annotator_id: str,
        label: str,
        submitted_at: str | None = None,
    ) -> dict:
        if label not in VALID_LABELS:
            raise ValidationError(f"label must be one of {VALID_LABELS}")
        if not self.store.sql("SELECT 1 FROM candidates WHERE id = ?", (candidate_id,)):
            raise UnknownCandidate(f"unknown candidate: {candidate_id}")
        stamp = submitted_at or datetime.now(timezone.utc).isoformat(timespec="seconds")

        current = self.store.sql(
            """SELECT id, label FROM annotation_labels
               WHERE candidate_id = ? AND annotator_id = ? AND superseded = 0""",
            (candidate_id, annotator_id),
        )
        if current and current[0]["label"] == label:
            stored = False  # identical resubmission: keep the original row
        else:
            if current:
                self.store.execute(
                    "UPDATE annotation_labels SET superseded = 1 WHERE id = ?",
                    (current[0]["id"],),
                )
            self.store.execute(
                """INSERT INTO annotation_labels
                       (candidate_id, annotator_id, label, submitted_at, superseded)
                   VALUES (?, ?, ?, ?, 0)""",
                (candidate_id, annotator_id, label, stamp),
            )
            stored = True

        advanced = self._advance_sessions(candidate_id, annotator_id)
        return {"status": "ok", "stored": stored, "cursor_advanced": advanced}

    def _advance_sessions(self, candidate_id: int, annotator_id: str) -> bool:
        advanced = False
        for row in self.store.sql(
            "SELECT session_id, queue, cursor FROM annotation_sessions"
            " WHERE annotator_id = ?",
            (annotator_id,),
        ):
            queue = json.loads(row["queue"])
            cursor = row["cursor"]
            if cursor < len(queue) and queue[cursor] == candidate_id:
                self.store.execute(
                    "UPDATE annotation_sessions SET cursor = ? WHERE session_id = ?",
                    (cursor + 1, row["session_id"]),
                )
                advanced = True
        return advanced

    # --- agreement ---------------------------------------------------------------

    def _active_labels(self) -> dict[str, dict[int, str]]:
        """annotator -> {candidate_id: label}, excluding 'unclear'."""
        by_annotator: dict[str, dict[int, str]] = {}
        for row in self.store.sql(
            """SELECT candidate_id, annotator_id, label FROM annotation_labels
               WHERE superseded = 0 AND label != 'unclear'
               ORDER BY candidate_id"""
        ):
            by_annotator.setdefault(row["annotator_id"], {})[row["candidate_id"]] = row[
                "label"
            ]
        return by_annotator

    def agreement_report(self) -> dict:
        """Kappa over the two annotators with the largest shared labeled
        set, plus every candidate they disagree on."""
        by_annotator = self._active_labels()
        annotators = sorted(by_annotator)
        best: tuple[str, str] | None = None
        best_overlap: set[int] = set()
        for i, a in enumerate(annotators):
            for b in annotators[i + 1 :]:
                overlap = set(by_annotator[a]) & set(by_annotator[b])
                if len(overlap) > len(best_overlap):
                    best = (a, b)
                    best_overlap = overlap
        if best is None or not best_overlap:
            raise InsufficientOverlap("need two annotators sharing a labeled pair")
        a, b = best
        ordered = sorted(best_overlap)
        labels_a = [by_annotator[a][c] for c in ordered]
        labels_b = [by_annotator[b][c] for c in ordered]
        kappa = cohens_kappa(labels_a, labels_b)
        disagreements = [
            {
                "candidate_id": c,
                "labels": {a: by_annotator[a][c], b: by_annotator[b][c]},
            }
            for c in ordered
            if by_annotator[a][c] != by_annotator[b][c]
        ]
        return {
            "kappa": kappa,
            "annotators": [a, b],
            "n_overlap": len(ordered),
            "disagreements": disagreements,
        }

    def progress(self) -> dict:
        sessions = []
        for row in self.store.sql(
            "SELECT session_id, annotator_id, queue, cursor FROM annotation_sessions"
            " ORDER BY session_id"
        ):
            queue = json.loads(row["queue"])
            sessions.append(
                {
                    "session_id": row["session_id"],
                    "annotator_id": row["annotator_id"],
                    "labeled": row["cursor"],
                    "remaining": len(queue) - row["cursor"],
                    "queue_size": len(queue),
                }
            )
        total_labels = self.store.sql(
            "SELECT COUNT(*) AS n FROM annotation_labels WHERE superseded = 0"
        )[0]["n"]
        return {"sessions": sessions, "total_labels": total_labels}


def create_app(store: GraphStore, static_dir: str | Path | None = None) -> FastAPI:
    app = FastAPI(title="softcredit annotation service")
    service = AnnotationService(store)
    app.state.service = service

    @app.exception_handler(SessionClosed)
    async def _session_closed(request: Request, exc: SessionClosed):
        return JSONResponse(status_code=404, content={"error": str(exc)})

    @app.exception_handler(UnknownCandidate)
    async def _unknown_candidate(request: Request, exc: UnknownCandidate):
        return JSONResponse(status_code=404, content={"error": str(exc)})

    @app.exception_handler(ValidationError)
    async def _validation(request: Request, exc: ValidationError):
        return JSONResponse(status_code=422, content={"error": str(exc)})

    @app.exception_handler(InsufficientOverlap)
    async def _overlap(request: Request, exc: InsufficientOverlap):
        return JSONResponse(status_code=409, content={"error": str(exc)})

    @app.post("/api/sessions")
    async def open_session(payload: dict):
        annotator_id = payload.get("annotator_id")
        if not annotator_id:
            raise ValidationError("annotator_id is required")
        return service.open_session(annotator_id, payload.get("limit"))

    @app.get("/api/session/{session_id}/next")
    async def next_pair(session_id: str):
        return service.next_pair(session_id)

    @app.post("/api/labels")
    async def submit_label(payload: dict):
        for field in ("candidate_id", "annotator_id", "label"):
            if field not in payload:
                raise ValidationError(f"{field} is required")
        return service.submit_label(
            candidate_id=payload["candidate_id"],
            annotator_id=payload["annotator_id"],
            label=payload["label"],
            submitted_at=payload.get("submitted_at"),
        )

    @app.get("/api/agreement")
    async def agreement():
        return service.agreement_report()

    @app.get("/api/progress")
    async def progress():
        return service.progress()

    if static_dir is not None and Path(static_dir).is_dir():
        static_path = Path(static_dir)

        @app.get("/")
        async def index():
            return FileResponse(static_path / "index.html")

        app.mount("/", StaticFiles(directory=static_path), name="static")

    return app
