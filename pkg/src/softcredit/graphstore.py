"""Single-file relational store for the research-software graph.

Natural keys (DOI, owner/name, provider author id, account id) are
unique-indexed; surrogate integer ids stay internal.  Exports write one
JSONL file per table with rows keyed by natural identifiers so a
round-trip re-import rebuilds an equivalent store regardless of the
surrogate numbering.
"""

from __future__ import annotations

import functools
import json
import sqlite3
import threading
from collections import Counter
from datetime import date, datetime, timezone
from pathlib import Path
from typing import Iterable, Sequence

from .errors import ConstraintViolation, SchemaVersionMismatch
from .records import (
    ArticleRecord,
    AuthorSlot,
    ContributorStat,
    PairRecord,
    RawPair,
    RepoRecord,
    RepoRef,
    SourceKind,
)

SCHEMA_VERSION = 1

_SCHEMA = """
CREATE TABLE IF NOT EXISTS articles (
    id INTEGER PRIMARY KEY,
    doi TEXT NOT NULL UNIQUE,
    title TEXT NOT NULL,
    article_type TEXT NOT NULL,
    domain TEXT NOT NULL,
    is_open_access INTEGER NOT NULL,
    publication_date TEXT NOT NULL,
    citation_count INTEGER NOT NULL CHECK (citation_count >= 0)
);
CREATE TABLE IF NOT EXISTS authors (
    id INTEGER PRIMARY KEY,
    author_id TEXT NOT NULL UNIQUE,
    display_name TEXT NOT NULL,
    h_index INTEGER NOT NULL CHECK (h_index >= 0),
    works_count INTEGER NOT NULL CHECK (works_count >= 1)
);
CREATE TABLE IF NOT EXISTS article_authors (
    article_id INTEGER NOT NULL REFERENCES articles(id),
    author_id INTEGER NOT NULL REFERENCES authors(id),
    author_order INTEGER NOT NULL,
    position TEXT NOT NULL,
    is_corresponding INTEGER NOT NULL,
    PRIMARY KEY (article_id, author_id)
);
CREATE TABLE IF NOT EXISTS repos (
    id INTEGER PRIMARY KEY,
    owner TEXT NOT NULL,
    name TEXT NOT NULL,
    owner_key TEXT NOT NULL,
    name_key TEXT NOT NULL,
    created_at TEXT NOT NULL,
    last_commit_at TEXT NOT NULL,
    language_bytes TEXT NOT NULL,
    negative_duration INTEGER NOT NULL DEFAULT 0,
    UNIQUE (owner_key, name_key)
);
CREATE TABLE IF NOT EXISTS contributors (
    id INTEGER PRIMARY KEY,
    dev_id TEXT NOT NULL UNIQUE,
    username TEXT NOT NULL,
    display_name TEXT,
    email TEXT
);
CREATE TABLE IF NOT EXISTS repo_contributors (
    repo_id INTEGER NOT NULL REFERENCES repos(id),
    contributor_id INTEGER NOT NULL REFERENCES contributors(id),
    commits INTEGER NOT NULL CHECK (commits >= 0),
    additions INTEGER NOT NULL CHECK (additions >= 0),
    deletions INTEGER NOT NULL CHECK (deletions >= 0),
    PRIMARY KEY (repo_id, contributor_id)
);
CREATE TABLE IF NOT EXISTS pairs (
    id INTEGER PRIMARY KEY,
    article_id INTEGER NOT NULL REFERENCES articles(id),
    repo_id INTEGER NOT NULL REFERENCES repos(id),
    source TEXT NOT NULL,
    excluded_reason TEXT,
    UNIQUE (article_id, repo_id)
);
CREATE TABLE IF NOT EXISTS match_edges (
    id INTEGER PRIMARY KEY,
    pair_id INTEGER NOT NULL REFERENCES pairs(id),
    author_id INTEGER NOT NULL REFERENCES authors(id),
    contributor_id INTEGER NOT NULL REFERENCES contributors(id),
    confidence REAL NOT NULL CHECK (confidence >= 0.0 AND confidence <= 1.0),
    UNIQUE (pair_id, author_id, contributor_id)
);
CREATE TABLE IF NOT EXISTS candidates (
    id INTEGER PRIMARY KEY,
    pair_id INTEGER NOT NULL REFERENCES pairs(id),
    author_id INTEGER NOT NULL REFERENCES authors(id),
    contributor_id INTEGER NOT NULL REFERENCES contributors(id),
    similarity REAL NOT NULL,
    UNIQUE (pair_id, author_id, contributor_id)
);
CREATE TABLE IF NOT EXISTS annotation_sessions (
    session_id TEXT PRIMARY KEY,
    annotator_id TEXT NOT NULL,
    queue TEXT NOT NULL,
    cursor INTEGER NOT NULL DEFAULT 0
);
CREATE TABLE IF NOT EXISTS annotation_labels (
    id INTEGER PRIMARY KEY,
    candidate_id INTEGER NOT NULL REFERENCES candidates(id),
    annotator_id TEXT NOT NULL,
    label TEXT NOT NULL,
    submitted_at TEXT NOT NULL,
    superseded INTEGER NOT NULL DEFAULT 0
);
CREATE TABLE IF NOT EXISTS audit (
    id INTEGER PRIMARY KEY,
    stage TEXT NOT NULL,
    reason TEXT NOT NULL,
    subject TEXT NOT NULL,
    detail TEXT NOT NULL DEFAULT ''
);
CREATE TABLE IF NOT EXISTS analysis_pairs (
    pair_id INTEGER PRIMARY KEY REFERENCES pairs(id)
);
CREATE TABLE IF NOT EXISTS analysis_edges (
    edge_id INTEGER PRIMARY KEY REFERENCES match_edges(id)
);
CREATE TABLE IF NOT EXISTS stage_runs (
    stage TEXT PRIMARY KEY,
    completed_at TEXT NOT NULL,
    detail TEXT NOT NULL DEFAULT ''
);
CREATE TABLE IF NOT EXISTS raw_pairs (
    id INTEGER PRIMARY KEY,
    doi TEXT NOT NULL,
    owner TEXT NOT NULL,
    name TEXT NOT NULL,
    source TEXT NOT NULL,
    relationship TEXT NOT NULL,
    UNIQUE (doi, owner, name, source)
);
CREATE TABLE IF NOT EXISTS team_compositions (
    pair_id INTEGER PRIMARY KEY REFERENCES pairs(id),
    total_authors INTEGER NOT NULL,
    cc_a INTEGER NOT NULL,
    ncc_a INTEGER NOT NULL,
    cc_na INTEGER NOT NULL
);
"""

# Exported tables in dependency order, with the columns each file carries.
EXPORT_TABLES = (
    "articles",
    "authors",
    "article_authors",
    "repos",
    "contributors",
    "repo_contributors",
    "pairs",
    "match_edges",
    "candidates",
    "annotation_labels",
    "audit",
)


def dedupe_one_to_one(pairs: Iterable[PairRecord]) -> set[PairRecord]:
    """Keep only pairs whose DOI and repository each appear exactly once.

    Removal is total: every pair on either side of a conflict goes, so
    the surviving graph is strictly one-to-one.
    """
    pairs = list(pairs)
    doi_counts = Counter(p.doi.casefold() for p in pairs)
    repo_counts = Counter(p.repo.key() for p in pairs)
    return {
        p
        for p in pairs
        if doi_counts[p.doi.casefold()] == 1 and repo_counts[p.repo.key()] == 1
    }


def _to_date(value: str) -> date:
    return date.fromisoformat(value)


def _locked(method):
    """Serialize store access: single writer, consistent readers."""

    @functools.wraps(method)
    def wrapper(self, *args, **kwargs):
        with self._lock:
            return method(self, *args, **kwargs)

    return wrapper


class GraphStore:
    """Thin transactional wrapper around the SQLite schema above."""

    def __init__(self, path: str | Path = ":memory:"):
        self.path = str(path)
        self._lock = threading.RLock()
        self._conn = sqlite3.connect(self.path, check_same_thread=False)
        self._conn.row_factory = sqlite3.Row
        self._conn.execute("PRAGMA foreign_keys = ON")
        self._conn.executescript(_SCHEMA)
        self._conn.commit()

    def close(self) -> None:
        self._conn.close()

    def __enter__(self) -> "GraphStore":
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    # --- upserts ---------------------------------------------------------

    @_locked
    def upsert_author(self, slot: AuthorSlot) -> int:
        self._conn.execute(
            """
            INSERT INTO authors (author_id, display_name, h_index, works_count)
            VALUES (?, ?, ?, ?)
            ON CONFLICT(author_id) DO UPDATE SET
                display_name = excluded.display_name,
                h_index = excluded.h_index,
                works_count = excluded.works_count
            """,
            (slot.author_id, slot.display_name, slot.h_index, slot.works_count),
        )
        self._conn.commit()
        return self._author_pk(slot.author_id)

    def _author_pk(self, author_id: str) -> int:
        row = self._conn.execute(
            "SELECT id FROM authors WHERE author_id = ?", (author_id,)
        ).fetchone()
        if row is None:
            raise ConstraintViolation(f"unknown author: {author_id!r}")
        return row["id"]

    @_locked
    def upsert_article(self, record: ArticleRecord) -> int:
        record.validate()
        try:
            self._conn.execute(
                """
                INSERT INTO articles
                    (doi, title, article_type, domain, is_open_access,
                     publication_date, citation_count)
                VALUES (?, ?, ?, ?, ?, ?, ?)
                ON CONFLICT(doi) DO UPDATE SET
                    title = excluded.title,
                    article_type = excluded.article_type,
                    domain = excluded.domain,
                    is_open_access = excluded.is_open_access,
                    publication_date = excluded.publication_date,
                    citation_count = excluded.citation_count
                """,
                (
                    record.doi,
                    record.title,
                    record.article_type,
                    record.domain,
                    int(record.is_open_access),
                    record.publication_date.isoformat(),
                    record.citation_count,
                ),
            )
        except sqlite3.IntegrityError as exc:
            raise ConstraintViolation(str(exc)) from exc
        article_id = self._article_pk(record.doi)
        self._conn.execute(
            "DELETE FROM article_authors WHERE article_id = ?", (article_id,)
        )
        for order, slot in enumerate(record.authors):
            author_pk = self.upsert_author(slot)
            self._conn.execute(
                """
                INSERT INTO article_authors
                    (article_id, author_id, author_order, position, is_corresponding)
                VALUES (?, ?, ?, ?, ?)
                """,
                (article_id, author_pk, order, slot.position, int(slot.is_corresponding)),
            )
        self._conn.commit()
        return article_id

    def _article_pk(self, doi: str) -> int:
        row = self._conn.execute(
            "SELECT id FROM articles WHERE doi = ?", (doi,)
        ).fetchone()
        if row is None:
            raise ConstraintViolation(f"unknown article DOI: {doi!r}")
        return row["id"]

    @_locked
    def upsert_contributor(self, c: ContributorStat) -> int:
        self._conn.execute(
            """
            INSERT INTO contributors (dev_id, username, display_name, email)
            VALUES (?, ?, ?, ?)
            ON CONFLICT(dev_id) DO UPDATE SET
                username = excluded.username,
                display_name = excluded.display_name,
                email = excluded.email
            """,
            (c.dev_id, c.username, c.display_name, c.email),
        )
        self._conn.commit()
        return self._contributor_pk(c.dev_id)

    def _contributor_pk(self, dev_id: str) -> int:
        row = self._conn.execute(
            "SELECT id FROM contributors WHERE dev_id = ?", (dev_id,)
        ).fetchone()
        if row is None:
            raise ConstraintViolation(f"unknown contributor: {dev_id!r}")
        return row["id"]

    @_locked
    def upsert_repo(self, record: RepoRecord) -> int:
        owner_key, name_key = record.repo.key()
        try:
            self._conn.execute(
                """
                INSERT INTO repos
                    (owner, name, owner_key, name_key, created_at,
                     last_commit_at, language_bytes, negative_duration)
                VALUES (?, ?, ?, ?, ?, ?, ?, ?)
                ON CONFLICT(owner_key, name_key) DO UPDATE SET
                    owner = excluded.owner,
                    name = excluded.name,
                    created_at = excluded.created_at,
                    last_commit_at = excluded.last_commit_at,
                    language_bytes = excluded.language_bytes,
                    negative_duration = excluded.negative_duration
                """,
                (
                    record.repo.owner,
                    record.repo.name,
                    owner_key,
                    name_key,
                    record.created_at.isoformat(),
                    record.last_commit_at.isoformat(),
                    json.dumps(record.language_bytes, sort_keys=True),
                    int(record.has_negative_duration),
                ),
            )
        except sqlite3.IntegrityError as exc:
            raise ConstraintViolation(str(exc)) from exc
        repo_id = self._repo_pk(record.repo)
        self._conn.execute("DELETE FROM repo_contributors WHERE repo_id = ?", (repo_id,))
        for c in record.contributors:
            contributor_pk = self.upsert_contributor(c)
            self._conn.execute(
                """
                INSERT INTO repo_contributors
                    (repo_id, contributor_id, commits, additions, deletions)
                VALUES (?, ?, ?, ?, ?)
                """,
                (repo_id, contributor_pk, c.commits, c.additions, c.deletions),
            )
        self._conn.commit()
        return repo_id

    def _repo_pk(self, ref: RepoRef) -> int:
        owner_key, name_key = ref.key()
        row = self._conn.execute(
            "SELECT id FROM repos WHERE owner_key = ? AND name_key = ?",
            (owner_key, name_key),
        ).fetchone()
        if row is None:
            raise ConstraintViolation(f"unknown repository: {ref.full_name!r}")
        return row["id"]

    @_locked
    def upsert_pair(self, doi: str, repo: RepoRef, source: SourceKind) -> int:
        article_id = self._article_pk(doi)
        repo_id = self._repo_pk(repo)
        self._conn.execute(
            """
            INSERT INTO pairs (article_id, repo_id, source)
            VALUES (?, ?, ?)
            ON CONFLICT(article_id, repo_id) DO UPDATE SET source = excluded.source
            """,
            (article_id, repo_id, source.value),
        )
        self._conn.commit()
        row = self._conn.execute(
            "SELECT id FROM pairs WHERE article_id = ? AND repo_id = ?",
            (article_id, repo_id),
        ).fetchone()
        return row["id"]

    @_locked
    def upsert_edge(
        self, pair_id: int, author_id: str, dev_id: str, confidence: float
    ) -> int:
        if not 0.0 <= confidence <= 1.0:
            raise ConstraintViolation(f"confidence out of range: {confidence!r}")
        author_pk = self._author_pk(author_id)
        contributor_pk = self._contributor_pk(dev_id)
        self._check_pair_exists(pair_id)
        self._conn.execute(
            """
            INSERT INTO match_edges (pair_id, author_id, contributor_id, confidence)
            VALUES (?, ?, ?, ?)
            ON CONFLICT(pair_id, author_id, contributor_id)
                DO UPDATE SET confidence = excluded.confidence
            """,
            (pair_id, author_pk, contributor_pk, confidence),
        )
        self._conn.commit()
        row = self._conn.execute(
            """
            SELECT id FROM match_edges
            WHERE pair_id = ? AND author_id = ? AND contributor_id = ?
            """,
            (pair_id, author_pk, contributor_pk),
        ).fetchone()
        return row["id"]

    @_locked
    def upsert_candidate(
        self, pair_id: int, author_id: str, dev_id: str, similarity: float
    ) -> int:
        author_pk = self._author_pk(author_id)
        contributor_pk = self._contributor_pk(dev_id)
        self._check_pair_exists(pair_id)
        self._conn.execute(
            """
            INSERT INTO candidates (pair_id, author_id, contributor_id, similarity)
            VALUES (?, ?, ?, ?)
            ON CONFLICT(pair_id, author_id, contributor_id)
                DO UPDATE SET similarity = excluded.similarity
            """,
            (pair_id, author_pk, contributor_pk, similarity),
        )
        self._conn.commit()
        row = self._conn.execute(
            """
            SELECT id FROM candidates
            WHERE pair_id = ? AND author_id = ? AND contributor_id = ?
            """,
            (pair_id, author_pk, contributor_pk),
        ).fetchone()
        return row["id"]

    def _check_pair_exists(self, pair_id: int) -> None:
        row = self._conn.execute(
            "SELECT 1 FROM pairs WHERE id = ?", (pair_id,)
        ).fetchone()
        if row is None:
            raise ConstraintViolation(f"unknown pair id: {pair_id}")

    @_locked
    def add_raw_pair(self, pair: RawPair) -> None:
        self._conn.execute(
            """
            INSERT INTO raw_pairs (doi, owner, name, source, relationship)
            VALUES (?, ?, ?, ?, ?)
            ON CONFLICT(doi, owner, name, source) DO NOTHING
            """,
            (
                pair.article_doi,
                pair.repo.owner,
                pair.repo.name,
                pair.source.value,
                pair.relationship,
            ),
        )
        self._conn.commit()

    @_locked
    def iter_raw_pairs(self) -> list[RawPair]:
        rows = self._conn.execute(
            "SELECT doi, owner, name, source, relationship FROM raw_pairs"
            " ORDER BY doi, lower(owner), lower(name), source"
        ).fetchall()
        return [
            RawPair(
                article_doi=r["doi"],
                repo=RepoRef(r["owner"], r["name"]),
                source=SourceKind(r["source"]),
                relationship=r["relationship"],
            )
            for r in rows
        ]

    @_locked
    def clear_stage_audit(self, stage: str) -> None:
        self._conn.execute("DELETE FROM audit WHERE stage = ?", (stage,))
        self._conn.commit()

    @_locked
    def add_audit(self, stage: str, reason: str, subject: str, detail: str = "") -> None:
        self._conn.execute(
            "INSERT INTO audit (stage, reason, subject, detail) VALUES (?, ?, ?, ?)",
            (stage, reason, subject, detail),
        )
        self._conn.commit()

    @_locked
    def record_stage(self, stage: str, detail: str = "") -> None:
        self._conn.execute(
            """
            INSERT INTO stage_runs (stage, completed_at, detail) VALUES (?, ?, ?)
            ON CONFLICT(stage) DO UPDATE SET
                completed_at = excluded.completed_at, detail = excluded.detail
            """,
            (stage, datetime.now(timezone.utc).isoformat(timespec="seconds"), detail),
        )
        self._conn.commit()

    @_locked
    def stage_completed(self, stage: str) -> bool:
        row = self._conn.execute(
            "SELECT 1 FROM stage_runs WHERE stage = ?", (stage,)
        ).fetchone()
        return row is not None

    # --- reads -------------------------------------------------------------

    @_locked
    def iter_pairs(self, include_excluded: bool = True) -> list[PairRecord]:
        rows = self._conn.execute(
            """
            SELECT p.id, p.source, p.excluded_reason, a.doi, r.owner, r.name
            FROM pairs p
            JOIN articles a ON a.id = p.article_id
            JOIN repos r ON r.id = p.repo_id
            ORDER BY a.doi, r.owner_key, r.name_key
            """
        ).fetchall()
        out = []
        for row in rows:
            if not include_excluded and row["excluded_reason"]:
                continue
            out.append(
                PairRecord(
                    pair_id=row["id"],
                    doi=row["doi"],
                    repo=RepoRef(row["owner"], row["name"]),
                    source=SourceKind(row["source"]),
                )
            )
        return out

    @_locked
    def get_article(self, doi: str) -> ArticleRecord:
        row = self._conn.execute(
            "SELECT * FROM articles WHERE doi = ?", (doi,)
        ).fetchone()
        if row is None:
            raise ConstraintViolation(f"unknown article DOI: {doi!r}")
        return self._article_from_row(row)

    def _article_from_row(self, row: sqlite3.Row) -> ArticleRecord:
        authors = self._conn.execute(
            """
            SELECT au.author_id, au.display_name, au.h_index, au.works_count,
                   aa.position, aa.is_corresponding
            FROM article_authors aa JOIN authors au ON au.id = aa.author_id
            WHERE aa.article_id = ?
            ORDER BY aa.author_order
            """,
            (row["id"],),
        ).fetchall()
        return ArticleRecord(
            doi=row["doi"],
            title=row["title"],
            article_type=row["article_type"],
            domain=row["domain"],
            is_open_access=bool(row["is_open_access"]),
            publication_date=_to_date(row["publication_date"]),
            citation_count=row["citation_count"],
            authors=[
                AuthorSlot(
                    author_id=a["author_id"],
                    display_name=a["display_name"],
                    position=a["position"],
                    is_corresponding=bool(a["is_corresponding"]),
                    h_index=a["h_index"],
                    works_count=a["works_count"],
                )
                for a in authors
            ],
        )

    @_locked
    def get_repo(self, ref: RepoRef) -> RepoRecord:
        owner_key, name_key = ref.key()
        row = self._conn.execute(
            "SELECT * FROM repos WHERE owner_key = ? AND name_key = ?",
            (owner_key, name_key),
        ).fetchone()
        if row is None:
            raise ConstraintViolation(f"unknown repository: {ref.full_name!r}")
        contributors = self._conn.execute(
            """
            SELECT c.dev_id, c.username, c.display_name, c.email,
                   rc.commits, rc.additions, rc.deletions
            FROM repo_contributors rc JOIN contributors c ON c.id = rc.contributor_id
            WHERE rc.repo_id = ?
            ORDER BY c.dev_id
            """,
            (row["id"],),
        ).fetchall()
        return RepoRecord(
            repo=RepoRef(row["owner"], row["name"]),
            created_at=_to_date(row["created_at"]),
            last_commit_at=_to_date(row["last_commit_at"]),
            language_bytes=json.loads(row["language_bytes"]),
            contributors=[
                ContributorStat(
                    dev_id=c["dev_id"],
                    username=c["username"],
                    display_name=c["display_name"],
                    email=c["email"],
                    commits=c["commits"],
                    additions=c["additions"],
                    deletions=c["deletions"],
                )
                for c in contributors
            ],
        )

    @_locked
    def edges_for_pair(self, pair_id: int) -> list[tuple[str, str, float]]:
        rows = self._conn.execute(
            """
            SELECT au.author_id, c.dev_id, e.confidence
            FROM match_edges e
            JOIN authors au ON au.id = e.author_id
            JOIN contributors c ON c.id = e.contributor_id
            WHERE e.pair_id = ?
            ORDER BY au.author_id, c.dev_id
            """,
            (pair_id,),
        ).fetchall()
        return [(r["author_id"], r["dev_id"], r["confidence"]) for r in rows]

    @_locked
    def mark_pair_excluded(self, pair_id: int, reason: str) -> None:
        self._conn.execute(
            "UPDATE pairs SET excluded_reason = ? WHERE id = ?", (reason, pair_id)
        )
        self._conn.commit()

    @_locked
    def clear_exclusions(self) -> None:
        self._conn.execute("UPDATE pairs SET excluded_reason = NULL")
        self._conn.commit()

    @_locked
    def set_analysis_sets(self, pair_ids: Sequence[int], edge_ids: Sequence[int]) -> None:
        self._conn.execute("DELETE FROM analysis_pairs")
        self._conn.execute("DELETE FROM analysis_edges")
        self._conn.executemany(
            "INSERT INTO analysis_pairs (pair_id) VALUES (?)",
            [(i,) for i in pair_ids],
        )
        self._conn.executemany(
            "INSERT INTO analysis_edges (edge_id) VALUES (?)",
            [(i,) for i in edge_ids],
        )
        self._conn.commit()

    @_locked
    def analysis_pair_ids(self) -> list[int]:
        rows = self._conn.execute(
            "SELECT pair_id FROM analysis_pairs ORDER BY pair_id"
        ).fetchall()
        return [r["pair_id"] for r in rows]

    @_locked
    def analysis_edges_for_pair(self, pair_id: int) -> list[tuple[str, str, float]]:
        rows = self._conn.execute(
            """
            SELECT au.author_id, c.dev_id, e.confidence
            FROM analysis_edges ae
            JOIN match_edges e ON e.id = ae.edge_id
            JOIN authors au ON au.id = e.author_id
            JOIN contributors c ON c.id = e.contributor_id
            WHERE e.pair_id = ?
            ORDER BY au.author_id, c.dev_id
            """,
            (pair_id,),
        ).fetchall()
        return [(r["author_id"], r["dev_id"], r["confidence"]) for r in rows]

    @_locked
    def sql(self, query: str, params: Sequence = ()) -> list[sqlite3.Row]:
        return self._conn.execute(query, params).fetchall()

    @_locked
    def execute(self, query: str, params: Sequence = ()) -> None:
        self._conn.execute(query, params)
        self._conn.commit()

    # --- one-to-one discipline ----------------------------------------------

    @_locked
    def apply_one_to_one(self, stage: str = "filter") -> int:
        """Mark every pair participating in a many-to-many conflict as
        excluded; returns the number of pairs removed."""
        active = self.iter_pairs(include_excluded=False)
        keep = dedupe_one_to_one(active)
        removed = 0
        for p in active:
            if p not in keep:
                self.mark_pair_excluded(p.pair_id, "one_to_one_conflict")
                self.add_audit(stage, "one_to_one_conflict", f"{p.doi}|{p.repo}")
                removed += 1
        return removed

    # --- export / import ------------------------------------------------------

    @_locked
    def export_dataset(self, out_dir: str | Path) -> Path:
        """One JSONL file per table plus a manifest; rows are keyed by
        natural identifiers and ordered deterministically."""
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        counts: dict[str, int] = {}

        def dump(name: str, rows: list[dict]) -> None:
            counts[name] = len(rows)
            with open(out / f"{name}.jsonl", "w", encoding="utf-8") as fh:
                for row in rows:
                    fh.write(json.dumps(row, sort_keys=True) + "\n")

        dump(
            "articles",
            [
                dict(r)
                for r in self.sql(
                    """SELECT doi, title, article_type, domain, is_open_access,
                              publication_date, citation_count
                       FROM articles ORDER BY doi"""
                )
            ],
        )
        dump(
            "authors",
            [
                dict(r)
                for r in self.sql(
                    "SELECT author_id, display_name, h_index, works_count "
                    "FROM authors ORDER BY author_id"
                )
            ],
        )
        dump(
            "article_authors",
            [
                dict(r)
                for r in self.sql(
                    """SELECT ar.doi, au.author_id, aa.author_order, aa.position,
                              aa.is_corresponding
                       FROM article_authors aa
                       JOIN articles ar ON ar.id = aa.article_id
                       JOIN authors au ON au.id = aa.author_id
                       ORDER BY ar.doi, aa.author_order"""
                )
            ],
        )
        dump(
            "repos",
            [
                dict(r)
                for r in self.sql(
                    """SELECT owner, name, created_at, last_commit_at,
                              language_bytes, negative_duration
                       FROM repos ORDER BY owner_key, name_key"""
                )
            ],
        )
        dump(
            "contributors",
            [
                dict(r)
                for r in self.sql(
                    "SELECT dev_id, username, display_name, email "
                    "FROM contributors ORDER BY dev_id"
                )
            ],
        )
        dump(
            "repo_contributors",
            [
                dict(r)
                for r in self.sql(
                    """SELECT r.owner, r.name, c.dev_id, rc.commits, rc.additions,
                              rc.deletions
                       FROM repo_contributors rc
                       JOIN repos r ON r.id = rc.repo_id
                       JOIN contributors c ON c.id = rc.contributor_id
                       ORDER BY r.owner_key, r.name_key, c.dev_id"""
                )
            ],
        )
        dump(
            "pairs",
            [
                dict(r)
                for r in self.sql(
                    """SELECT a.doi, r.owner, r.name, p.source, p.excluded_reason
                       FROM pairs p
                       JOIN articles a ON a.id = p.article_id
                       JOIN repos r ON r.id = p.repo_id
                       ORDER BY a.doi, r.owner_key, r.name_key"""
                )
            ],
        )
        dump(
            "match_edges",
            [
                dict(r)
                for r in self.sql(
                    """SELECT a.doi, r.owner, r.name, au.author_id, c.dev_id,
                              e.confidence
                       FROM match_edges e
                       JOIN pairs p ON p.id = e.pair_id
                       JOIN articles a ON a.id = p.article_id
                       JOIN repos r ON r.id = p.repo_id
                       JOIN authors au ON au.id = e.author_id
                       JOIN contributors c ON c.id = e.contributor_id
                       ORDER BY a.doi, r.owner_key, r.name_key, au.author_id, c.dev_id"""
                )
            ],
        )
        dump(
            "candidates",
            [
                dict(r)
                for r in self.sql(
                    """SELECT a.doi, r.owner, r.name, au.author_id, c.dev_id,
                              cd.similarity
                       FROM candidates cd
                       JOIN pairs p ON p.id = cd.pair_id
                       JOIN articles a ON a.id = p.article_id
                       JOIN repos r ON r.id = p.repo_id
                       JOIN authors au ON au.id = cd.author_id
                       JOIN contributors c ON c.id = cd.contributor_id
                       ORDER BY a.doi, r.owner_key, r.name_key, au.author_id, c.dev_id"""
                )
            ],
        )
        dump(
            "annotation_labels",
            [
                dict(r)
                for r in self.sql(
                    """SELECT a.doi, r.owner, r.name, au.author_id, c.dev_id,
                              al.annotator_id, al.label, al.submitted_at, al.superseded
                       FROM annotation_labels al
                       JOIN candidates cd ON cd.id = al.candidate_id
                       JOIN pairs p ON p.id = cd.pair_id
                       JOIN articles a ON a.id = p.article_id
                       JOIN repos r ON r.id = p.repo_id
                       JOIN authors au ON au.id = cd.author_id
                       JOIN contributors c ON c.id = cd.contributor_id
                       ORDER BY a.doi, r.owner_key, r.name_key, au.author_id,
                                c.dev_id, al.annotator_id, al.id"""
                )
            ],
        )
        dump(
            "audit",
            [
                dict(r)
                for r in self.sql(
                    "SELECT stage, reason, subject, detail FROM audit ORDER BY id"
                )
            ],
        )
        manifest = {"schema_version": SCHEMA_VERSION, "counts": counts}
        with open(out / "manifest.json", "w", encoding="utf-8") as fh:
            json.dump(manifest, fh, sort_keys=True, indent=2)
            fh.write("\n")
        return out


def _read_jsonl(path: Path) -> list[dict]:
    if not path.exists():
        return []
    rows = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                rows.append(json.loads(line))
    return rows


def import_dataset(in_dir: str | Path, store_path: str | Path = ":memory:") -> GraphStore:
    """Rebuild a store from an export; natural keys drive identity, so
    surrogate ids are free to differ from the original store's."""
    src = Path(in_dir)
    manifest_path = src / "manifest.json"
    if not manifest_path.exists():
        raise SchemaVersionMismatch("export is missing manifest.json")
    manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    if manifest.get("schema_version") != SCHEMA_VERSION:
        raise SchemaVersionMismatch(
            f"export schema {manifest.get('schema_version')!r} "
            f"!= supported {SCHEMA_VERSION}"
        )

    store = GraphStore(store_path)
    authors_by_id: dict[str, AuthorSlot] = {}
    for row in _read_jsonl(src / "authors.jsonl"):
        authors_by_id[row["author_id"]] = AuthorSlot(
            author_id=row["author_id"],
            display_name=row["display_name"],
            position="first",  # placeholder; slots carry the real position
            h_index=row["h_index"],
            works_count=row["works_count"],
        )
        store.upsert_author(authors_by_id[row["author_id"]])

    slots_by_doi: dict[str, list[dict]] = {}
    for row in _read_jsonl(src / "article_authors.jsonl"):
        slots_by_doi.setdefault(row["doi"], []).append(row)

    for row in _read_jsonl(src / "articles.jsonl"):
        slots = sorted(slots_by_doi.get(row["doi"], []), key=lambda s: s["author_order"])
        authors = []
        for s in slots:
            if s["author_id"] not in authors_by_id:
                raise ConstraintViolation(
                    f"article {row['doi']} references unknown author {s['author_id']}"
                )
            base = authors_by_id[s["author_id"]]
            authors.append(
                AuthorSlot(
                    author_id=base.author_id,
                    display_name=base.display_name,
                    position=s["position"],
                    is_corresponding=bool(s["is_corresponding"]),
                    h_index=base.h_index,
                    works_count=base.works_count,
                )
            )
        store.upsert_article(
            ArticleRecord(
                doi=row["doi"],
                title=row["title"],
                article_type=row["article_type"],
                domain=row["domain"],
                is_open_access=bool(row["is_open_access"]),
                publication_date=_to_date(row["publication_date"]),
                citation_count=row["citation_count"],
                authors=authors,
            )
        )

    contributors_by_id: dict[str, ContributorStat] = {}
    for row in _read_jsonl(src / "contributors.jsonl"):
        contributors_by_id[row["dev_id"]] = ContributorStat(
            dev_id=row["dev_id"],
            username=row["username"],
            display_name=row["display_name"],
            email=row["email"],
            commits=0,
        )

    repo_contribs: dict[tuple[str, str], list[dict]] = {}
    for row in _read_jsonl(src / "repo_contributors.jsonl"):
        key = (row["owner"].casefold(), row["name"].casefold())
        repo_contribs.setdefault(key, []).append(row)

    for row in _read_jsonl(src / "repos.jsonl"):
        ref = RepoRef(row["owner"], row["name"])
        contribs = []
        for c in repo_contribs.get(ref.key(), []):
            if c["dev_id"] not in contributors_by_id:
                raise ConstraintViolation(
                    f"repo {ref} references unknown contributor {c['dev_id']}"
                )
            base = contributors_by_id[c["dev_id"]]
            contribs.append(
                ContributorStat(
                    dev_id=base.dev_id,
                    username=base.username,
                    display_name=base.display_name,
                    email=base.email,
                    commits=c["commits"],
                    additions=c["additions"],
                    deletions=c["deletions"],
                )
            )
        store.upsert_repo(
            RepoRecord(
                repo=ref,
                created_at=_to_date(row["created_at"]),
                last_commit_at=_to_date(row["last_commit_at"]),
                language_bytes=json.loads(row["language_bytes"]),
                contributors=contribs,
            )
        )

    pair_ids: dict[tuple[str, str, str], int] = {}
    for row in _read_jsonl(src / "pairs.jsonl"):
        ref = RepoRef(row["owner"], row["name"])
        pair_id = store.upsert_pair(row["doi"], ref, SourceKind(row["source"]))
        if row.get("excluded_reason"):
            store.mark_pair_excluded(pair_id, row["excluded_reason"])
        pair_ids[(row["doi"],) + ref.key()] = pair_id

    def _pair_for(row: dict) -> int:
        key = (row["doi"],) + RepoRef(row["owner"], row["name"]).key()
        if key not in pair_ids:
            raise ConstraintViolation(f"row references unknown pair {key}")
        return pair_ids[key]

    for row in _read_jsonl(src / "match_edges.jsonl"):
        store.upsert_edge(_pair_for(row), row["author_id"], row["dev_id"], row["confidence"])

    candidate_ids: dict[tuple, int] = {}
    for row in _read_jsonl(src / "candidates.jsonl"):
        cid = store.upsert_candidate(
            _pair_for(row), row["author_id"], row["dev_id"], row["similarity"]
        )
        candidate_ids[(row["doi"], row["owner"], row["name"], row["author_id"], row["dev_id"])] = cid

    for row in _read_jsonl(src / "annotation_labels.jsonl"):
        key = (row["doi"], row["owner"], row["name"], row["author_id"], row["dev_id"])
        if key not in candidate_ids:
            raise ConstraintViolation(f"label references unknown candidate {key}")
        store.execute(
            """INSERT INTO annotation_labels
                   (candidate_id, annotator_id, label, submitted_at, superseded)
               VALUES (?, ?, ?, ?, ?)""",
            (
                candidate_ids[key],
                row["annotator_id"],
                row["label"],
                row["submitted_at"],
                int(row["superseded"]),
            ),
        )

    for row in _read_jsonl(src / "audit.jsonl"):
        store.add_audit(row["stage"], row["reason"], row["subject"], row["detail"])

    return store
