"""Core record types for the article-repository graph."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from datetime import date
from enum import Enum

from .errors import ConstraintViolation

DOI_RE = re.compile(r"^10\.\d{4,9}/\S+$")

ARTICLE_TYPES = ("preprint", "research article", "software article")
DOMAINS = ("Health Sciences", "Life Sciences", "Physical Sciences", "Social Sciences")
POSITIONS = ("first", "middle", "last")
RELATIONSHIPS = ("official", "mined")


class SourceKind(str, Enum):
    PLOS = "plos"
    JOSS = "joss"
    SOFTWAREX = "softwarex"
    PWC = "pwc"

    @property
    def default_article_type(self) -> str:
        # pwc records start as preprints; DOI resolution may reclassify them
        if self in (SourceKind.JOSS, SourceKind.SOFTWAREX):
            return "software article"
        if self is SourceKind.PLOS:
            return "research article"
        return "preprint"


def is_valid_doi(doi: str) -> bool:
    return bool(DOI_RE.match(doi))


_TOKEN_RE = re.compile(r"^[A-Za-z0-9][A-Za-z0-9._-]*$")


@dataclass(frozen=True, eq=False)
class RepoRef:
    """A GitHub repository as owner/name, compared case-insensitively."""

    owner: str
    name: str

    def __post_init__(self):
        for part in (self.owner, self.name):
            if not part or not _TOKEN_RE.match(part) or "/" in part:
                raise ValueError(f"invalid repository token: {part!r}")
        if self.name.lower().endswith(".git"):
            raise ValueError(f"repository name keeps a .git suffix: {self.name!r}")
        # a trailing dot cannot survive prose extraction, so it is not
        # part of any canonical reference
        if self.name.endswith("."):
            raise ValueError(f"repository name ends with punctuation: {self.name!r}")

    @property
    def full_name(self) -> str:
        return f"{self.owner}/{self.name}"

    def key(self) -> tuple[str, str]:
        return (self.owner.casefold(), self.name.casefold())

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, RepoRef):
            return NotImplemented
        return self.key() == other.key()

    def __hash__(self) -> int:
        return hash(self.key())

    def __str__(self) -> str:
        return self.full_name


@dataclass(frozen=True)
class RawPair:
    """A candidate article-repository link straight out of a source feed."""

    article_doi: str
    repo: RepoRef
    source: SourceKind
    relationship: str = "official"

    def __post_init__(self):
        if not is_valid_doi(self.article_doi):
            raise ValueError(f"malformed DOI: {self.article_doi!r}")
        if self.relationship not in RELATIONSHIPS:
            raise ValueError(f"unknown relationship: {self.relationship!r}")


@dataclass
class AuthorSlot:
    """One author position on one article."""

    author_id: str
    display_name: str
    position: str
    is_corresponding: bool = False
    h_index: int = 0
    works_count: int = 1

    def __post_init__(self):
        if self.position not in POSITIONS:
            raise ValueError(f"unknown position: {self.position!r}")
        if self.h_index < 0:
            raise ValueError("h_index must be non-negative")
        if self.works_count < 1:
            raise ValueError("works_count must be positive")


@dataclass
class ArticleRecord:
    doi: str
    title: str
    article_type: str
    domain: str
    is_open_access: bool
    publication_date: date
    citation_count: int
    authors: list[AuthorSlot] = field(default_factory=list)

    def validate(self) -> None:
        if not is_valid_doi(self.doi):
            raise ConstraintViolation(f"malformed DOI: {self.doi!r}")
        if self.article_type not in ARTICLE_TYPES:
            raise ConstraintViolation(f"unknown article type: {self.article_type!r}")
        if self.domain not in DOMAINS:
            raise ConstraintViolation(f"unknown domain: {self.domain!r}")
        if self.citation_count < 0:
            raise ConstraintViolation("citation_count must be non-negative")
        if self.authors:
            firsts = sum(1 for a in self.authors if a.position == "first")
            lasts = sum(1 for a in self.authors if a.position == "last")
            if firsts != 1:
                raise ConstraintViolation("exactly one first author required")
            if len(self.authors) >= 2 and lasts != 1:
                raise ConstraintViolation("exactly one last author required")
            if self.authors[0].position != "first":
                raise ConstraintViolation("positions inconsistent with author order")
            if len(self.authors) >= 2 and self.authors[-1].position != "last":
                raise ConstraintViolation("positions inconsistent with author order")


def positions_for_count(n: int) -> list[str]:
    """Standard position labels for an ordered author list of length n."""
    if n <= 0:
        return []
    if n == 1:
        return ["first"]
    return ["first"] + ["middle"] * (n - 2) + ["last"]


@dataclass
class ContributorStat:
    """One developer account's activity on one repository."""

    dev_id: str
    username: str
    display_name: str | None = None
    email: str | None = None
    commits: int = 0
    additions: int = 0
    deletions: int = 0

    def __post_init__(self):
        for name in ("commits", "additions", "deletions"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")


@dataclass
class RepoRecord:
    repo: RepoRef
    created_at: date
    last_commit_at: date
    language_bytes: dict[str, int] = field(default_factory=dict)
    contributors: list[ContributorStat] = field(default_factory=list)

    def __post_init__(self):
        for lang, size in self.language_bytes.items():
            if size < 0:
                raise ValueError(f"negative byte count for {lang!r}")

    @property
    def commit_duration_days(self) -> int:
        return (self.last_commit_at - self.created_at).days

    @property
    def has_negative_duration(self) -> bool:
        # The upstream data genuinely contains repositories whose recorded
        # creation postdates their last commit; they are kept and flagged.
        return self.commit_duration_days < 0


@dataclass(frozen=True)
class PairRecord:
    """An article-repository edge as persisted in the graph store."""

    pair_id: int
    doi: str
    repo: RepoRef
    source: SourceKind


@dataclass(frozen=True)
class MatchEdge:
    """A predicted author-developer link with model confidence."""

    pair_id: int
    author_id: str
    dev_id: str
    confidence: float

    def __post_init__(self):
        if not 0.0 <= self.confidence <= 1.0:
            raise ConstraintViolation(
                f"confidence out of range: {self.confidence!r}"
            )
