"""DOI resolution and metadata harvesting through pluggable backends.

Two backends ship for each provider role: a live HTTPS client and a
directory-of-fixtures reader with identical semantics.  Tests and the
acceptance pipeline run entirely on fixtures; the live clients exist
for real harvests and share the same cache and rate budget.

Fixture layout::

    <fixture_dir>/resolver/map.json            {doi: resolved_doi}
    <fixture_dir>/articles/<urlencoded-doi>.json
    <fixture_dir>/repos/<owner>__<name>.json
"""

from __future__ import annotations

import abc
import json
import logging
import os
import threading
import time
import urllib.parse
from concurrent.futures import ThreadPoolExecutor
from datetime import date
from pathlib import Path

import requests

from .errors import BackendError, NotFound, RateLimited, RepoGone, ResolverUnavailable
from .records import (
    ArticleRecord,
    AuthorSlot,
    ContributorStat,
    RepoRecord,
    RepoRef,
    SourceKind,
    is_valid_doi,
    positions_for_count,
)

logger = logging.getLogger(__name__)

GITHUB_TOKEN_ENV = "SOFTCREDIT_GITHUB_TOKEN"
RESOLVER_TOKEN_ENV = "SOFTCREDIT_RESOLVER_TOKEN"

_BACKOFF_CAP_SECONDS = 15 * 60


class MetadataBackend(abc.ABC):
    """Article-side provider: DOI resolution and article payloads."""

    @abc.abstractmethod
    def resolve(self, doi: str) -> str | None:
        """Latest-version DOI, or None when the resolver has no mapping."""

    @abc.abstractmethod
    def article(self, doi: str) -> dict | None:
        """Raw article payload, or None when the provider has no record."""


class RepoBackend(abc.ABC):
    @abc.abstractmethod
    def repo(self, ref: RepoRef) -> dict | None:
        """Raw repository payload, or None when the repository is gone."""


def doi_fixture_name(doi: str) -> str:
    return urllib.parse.quote(doi, safe="") + ".json"


def repo_fixture_name(ref: RepoRef) -> str:
    owner_key, name_key = ref.key()
    return f"{owner_key}__{name_key}.json"


class FixtureMetadataBackend(MetadataBackend):
    def __init__(self, fixture_dir: str | Path):
        self.root = Path(fixture_dir)
        self._resolver_map: dict[str, str] | None = None

    def resolve(self, doi: str) -> str | None:
        if self._resolver_map is None:
            path = self.root / "resolver" / "map.json"
            self._resolver_map = (
                json.loads(path.read_text(encoding="utf-8")) if path.exists() else {}
            )
        return self._resolver_map.get(doi)

    def article(self, doi: str) -> dict | None:
        path = self.root / "articles" / doi_fixture_name(doi)
        if not path.exists():
            return None
        return json.loads(path.read_text(encoding="utf-8"))


class FixtureRepoBackend(RepoBackend):
    def __init__(self, fixture_dir: str | Path):
        self.root = Path(fixture_dir)

    def repo(self, ref: RepoRef) -> dict | None:
        path = self.root / "repos" / repo_fixture_name(ref)
        if not path.exists():
            return None
        return json.loads(path.read_text(encoding="utf-8"))


class LiveMetadataBackend(MetadataBackend):
    """HTTPS metadata client; endpoint bases come from configuration and
    the auth token (if any) from the environment."""

    def __init__(self, resolver_base: str, article_base: str, session=None):
        self.resolver_base = resolver_base.rstrip("/")
        self.article_base = article_base.rstrip("/")
        self.session = session or requests.Session()
        token = os.environ.get(RESOLVER_TOKEN_ENV)
        if token:
            self.session.headers["x-api-key"] = token

    def _get(self, url: str) -> dict | None:
        try:
            resp = self.session.get(url, timeout=30)
        except requests.RequestException as exc:
            raise ResolverUnavailable(str(exc)) from exc
        if resp.status_code == 404:
            return None
        if resp.status_code == 429:
            raise RateLimited(retry_after=float(resp.headers.get("Retry-After", 60)))
        if resp.status_code >= 500:
            raise BackendError(f"{url} -> {resp.status_code}")
        resp.raise_for_status()
        return resp.json()

    def resolve(self, doi: str) -> str | None:
        payload = self._get(f"{self.resolver_base}/{urllib.parse.quote(doi, safe='')}")
        if payload is None:
            return None
        return payload.get("resolved_doi")

    def article(self, doi: str) -> dict | None:
        return self._get(f"{self.article_base}/{urllib.parse.quote(doi, safe='')}")


class LiveRepoBackend(RepoBackend):
    def __init__(self, api_base: str = "https://api.github.com", session=None):
        self.api_base = api_base.rstrip("/")
        self.session = session or requests.Session()
        self.session.headers["Accept"] = "application/vnd.github.v3+json"
        token = os.environ.get(GITHUB_TOKEN_ENV)
        if token:
            self.session.headers["Authorization"] = f"token {token}"

    def repo(self, ref: RepoRef) -> dict | None:
        url = f"{self.api_base}/repos/{ref.owner}/{ref.name}"
        try:
            resp = self.session.get(url, timeout=30)
        except requests.RequestException as exc:
            raise BackendError(str(exc)) from exc
        if resp.status_code == 404:
            return None
        if resp.status_code in (403, 429):
            raise RateLimited(retry_after=float(resp.headers.get("Retry-After", 60)))
        if resp.status_code >= 500:
            raise BackendError(f"{url} -> {resp.status_code}")
        resp.raise_for_status()
        return resp.json()


class FetchCache:
    """Harvest-snapshot cache keyed by (endpoint, canonical id); entries
    never expire unless explicitly cleared."""

    def __init__(self, cache_dir: str | Path):
        self.root = Path(cache_dir)
        self._lock = threading.Lock()

    def _path(self, endpoint: str, key: str) -> Path:
        return self.root / endpoint / (urllib.parse.quote(key, safe="") + ".json")

    def get(self, endpoint: str, key: str) -> dict | None:
        path = self._path(endpoint, key)
        if not path.exists():
            return None
        return json.loads(path.read_text(encoding="utf-8"))

    def put(self, endpoint: str, key: str, payload: dict) -> None:
        path = self._path(endpoint, key)
        with self._lock:
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(
                json.dumps(payload, sort_keys=True), encoding="utf-8"
            )


class RateBudget:
    """Token bucket with exponential backoff capped at fifteen minutes."""

    def __init__(
        self,
        requests_per_hour: int = 5000,
        clock=time.monotonic,
        sleep=time.sleep,
    ):
        self.capacity = float(requests_per_hour)
        self.tokens = float(requests_per_hour)
        self.rate = requests_per_hour / 3600.0
        self.clock = clock
        self.sleep = sleep
        self._last = clock()
        self._lock = threading.Lock()
        self._backoff = 1.0

    def acquire(self) -> None:
        with self._lock:
            now = self.clock()
            self.tokens = min(self.capacity, self.tokens + (now - self._last) * self.rate)
            self._last = now
            if self.tokens < 1.0:
                wait = (1.0 - self.tokens) / self.rate
                self.sleep(wait)
                self.tokens = 1.0
            self.tokens -= 1.0

    def penalize(self, retry_after: float | None = None) -> float:
        """Sleep after a RateLimited response; returns the wait used."""
        wait = retry_after if retry_after is not None else self._backoff
        wait = min(wait, _BACKOFF_CAP_SECONDS)
        self.sleep(wait)
        self._backoff = min(self._backoff * 2.0, _BACKOFF_CAP_SECONDS)
        return wait

    def reset_backoff(self) -> None:
        self._backoff = 1.0


def _payload_to_article(doi: str, payload: dict) -> ArticleRecord:
    raw_authors = payload.get("authors", [])
    positions = positions_for_count(len(raw_authors))
    authors = [
        AuthorSlot(
            author_id=a["author_id"],
            display_name=a["display_name"],
            position=positions[i],
            is_corresponding=bool(a.get("is_corresponding", False)),
            h_index=int(a.get("h_index", 0)),
            works_count=int(a.get("works_count", 1)),
        )
        for i, a in enumerate(raw_authors)
    ]
    return ArticleRecord(
        doi=doi,
        title=payload.get("title", ""),
        article_type=payload.get("type", "research article"),
        domain=payload.get("domain", ""),
        is_open_access=bool(payload.get("is_open_access", False)),
        publication_date=date.fromisoformat(payload["publication_date"]),
        citation_count=int(payload.get("citation_count", 0)),
        authors=authors,
    )


def _payload_to_repo(ref: RepoRef, payload: dict) -> RepoRecord:
    contributors = [
        ContributorStat(
            dev_id=c["dev_id"],
            username=c["username"],
            display_name=c.get("display_name"),
            email=c.get("email"),
            commits=int(c.get("commits", 0)),
            additions=int(c.get("additions", 0)),
            deletions=int(c.get("deletions", 0)),
        )
        for c in payload.get("contributors", [])
    ]
    return RepoRecord(
        repo=RepoRef(payload.get("owner", ref.owner), payload.get("name", ref.name)),
        created_at=date.fromisoformat(payload["created_at"]),
        last_commit_at=date.fromisoformat(payload["last_commit_at"]),
        language_bytes={k: int(v) for k, v in payload.get("language_bytes", {}).items()},
        contributors=contributors,
    )


def classify_article_type(source: SourceKind, payload_type: str | None) -> str:
    """Source determines the label except for pwc records, which take
    the metadata backend's document type after DOI resolution."""
    if source in (SourceKind.JOSS, SourceKind.SOFTWAREX, SourceKind.PLOS):
        return source.default_article_type
    if payload_type in ("research article", "article"):
        return "research article"
    if payload_type == "software article":
        return "software article"
    return "preprint"


class Enricher:
    """Resolve, fetch, convert, and cache article and repository records."""

    def __init__(
        self,
        metadata: MetadataBackend,
        repos: RepoBackend,
        cache: FetchCache | None = None,
        budget: RateBudget | None = None,
        max_retries: int = 3,
        parallelism: int = 4,
    ):
        self.metadata = metadata
        self.repos = repos
        self.cache = cache
        self.budget = budget
        self.max_retries = max_retries
        self.parallelism = max(1, parallelism)

    def _with_retries(self, fn, *args):
        attempt = 0
        while True:
            if self.budget is not None:
                self.budget.acquire()
            try:
                result = fn(*args)
                if self.budget is not None:
                    self.budget.reset_backoff()
                return result
            except RateLimited as exc:
                attempt += 1
                if attempt > self.max_retries:
                    raise
                if self.budget is not None:
                    self.budget.penalize(exc.retry_after)
            except (ResolverUnavailable, BackendError):
                attempt += 1
                if attempt > self.max_retries:
                    raise
                if self.budget is not None:
                    self.budget.penalize(None)

    def resolve_doi(self, doi: str) -> str:
        """Latest-version DOI when the resolver knows one, otherwise the
        input unchanged."""
        if not is_valid_doi(doi):
            raise ValueError(f"malformed DOI: {doi!r}")
        if self.cache is not None:
            hit = self.cache.get("resolver", doi)
            if hit is not None:
                return hit["resolved_doi"]
        resolved = self._with_retries(self.metadata.resolve, doi) or doi
        if self.cache is not None:
            self.cache.put("resolver", doi, {"resolved_doi": resolved})
        return resolved

    def fetch_article(self, doi: str) -> ArticleRecord:
        if self.cache is not None:
            hit = self.cache.get("articles", doi)
            if hit is not None:
                return self._article_from_payload(doi, hit)
        payload = self._with_retries(self.metadata.article, doi)
        if payload is None:
            raise NotFound(f"no article record for {doi}", reason="article_not_found")
        if self.cache is not None:
            self.cache.put("articles", doi, payload)
        return self._article_from_payload(doi, payload)

    @staticmethod
    def _article_from_payload(doi: str, payload: dict) -> ArticleRecord:
        record = _payload_to_article(doi, payload)
        if not record.authors:
            raise NotFound(f"article {doi} has no author list", reason="no_authors")
        if record.domain not in (
            "Health Sciences",
            "Life Sciences",
            "Physical Sciences",
            "Social Sciences",
        ):
            # provider domain missing or unmapped: excluded, never imputed
            raise NotFound(f"article {doi} has no usable domain", reason="missing_domain")
        return record

    def fetch_repo(self, ref: RepoRef) -> RepoRecord:
        cache_key = ref.full_name.casefold()
        if self.cache is not None:
            hit = self.cache.get("repos", cache_key)
            if hit is not None:
                return _payload_to_repo(ref, hit)
        payload = self._with_retries(self.repos.repo, ref)
        if payload is None:
            raise RepoGone(f"repository {ref} is not accessible")
        if self.cache is not None:
            self.cache.put("repos", cache_key, payload)
        return _payload_to_repo(ref, payload)

    def fetch_repos(self, refs: list[RepoRef]) -> dict[RepoRef, RepoRecord | Exception]:
        """Fetch many repositories with bounded parallelism; results are
        keyed by ref so callers can apply them in a deterministic order."""
        out: dict[RepoRef, RepoRecord | Exception] = {}
        with ThreadPoolExecutor(max_workers=self.parallelism) as pool:
            futures = {ref: pool.submit(self.fetch_repo, ref) for ref in refs}
            for ref, future in futures.items():
                try:
                    out[ref] = future.result()
                except Exception as exc:  # collected, not raised: caller audits
                    out[ref] = exc
        return out
