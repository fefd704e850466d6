"""Parse source feeds into candidate article-repository pairs.

Each source ships one JSONL file.  JOSS and SoftwareX rows carry an
explicit ``repository_url``; PLOS rows carry free-text availability
statements that get mined for GitHub links; Papers-with-Code rows carry
a ``repo_url`` plus an ``is_official`` flag, and only official links
are kept.
"""

from __future__ import annotations

import json
import re
from pathlib import Path
from typing import Callable

from .errors import MalformedRepoUrl, SchemaError
from .records import RawPair, RepoRef, SourceKind, is_valid_doi

# Availability statements are prose: accept bare hosts, optional scheme
# and www, and tolerate trailing sentence punctuation.
_GITHUB_LINK_RE = re.compile(
    r"(?:https?://)?(?:www\.)?github\.com/"
    r"([A-Za-z0-9][A-Za-z0-9-]*)/([A-Za-z0-9._-]+)",
    re.IGNORECASE,
)

_TRAILING_PUNCT = ".,;:)]"

DropCallback = Callable[[int, str], None]


def _clean_name(name: str) -> str:
    name = name.rstrip(_TRAILING_PUNCT)
    if name.lower().endswith(".git"):
        name = name[:-4]
    return name.rstrip(_TRAILING_PUNCT)


def extract_repo_links(text: str) -> list[RepoRef]:
    """Every distinct GitHub repository named in free text, in order of
    first appearance.  Non-GitHub hosts never match; duplicates within
    one document collapse case-insensitively to a single reference."""
    found: list[RepoRef] = []
    seen: set[tuple[str, str]] = set()
    for match in _GITHUB_LINK_RE.finditer(text or ""):
        owner, name = match.group(1), _clean_name(match.group(2))
        if not name:
            continue
        try:
            ref = RepoRef(owner, name)
        except ValueError:
            continue
        if ref.key() not in seen:
            seen.add(ref.key())
            found.append(ref)
    return found


def normalize_repo_url(url: str) -> RepoRef:
    """Reduce any github.com URL to its owner/name pair.

    Strips scheme, www, query, fragment, trailing slashes and a .git
    suffix; keeps only the first two path segments.  Raises
    MalformedRepoUrl when fewer than two usable segments remain.
    """
    lowered = url.lower()
    idx = lowered.find("github.com")
    if idx < 0:
        raise MalformedRepoUrl(f"not a github.com URL: {url!r}")
    path = url[idx + len("github.com") :]
    path = path.split("?", 1)[0].split("#", 1)[0]
    segments = [s for s in path.split("/") if s]
    if len(segments) < 2:
        raise MalformedRepoUrl(f"missing owner/name segments: {url!r}")
    owner, name = segments[0], _clean_name(segments[1])
    try:
        return RepoRef(owner, name)
    except ValueError as exc:
        raise MalformedRepoUrl(str(exc)) from exc


def _row_repo_refs(row: dict, kind: SourceKind, lineno: int) -> tuple[list[RepoRef], str, str | None]:
    """Returns (refs, relationship, drop_reason)."""
    if kind is SourceKind.PLOS:
        text = row.get("availability_text")
        if not isinstance(text, str):
            raise SchemaError("plos row missing availability_text", lineno)
        refs = extract_repo_links(text)
        return refs, "mined", None if refs else "no_repo_link"

    if kind is SourceKind.PWC:
        if "is_official" not in row or "repo_url" not in row:
            raise SchemaError("pwc row missing repo_url/is_official", lineno)
        if not row["is_official"]:
            return [], "official", "unofficial"
        url = row["repo_url"]
    else:
        url = row.get("repository_url")
        if not isinstance(url, str):
            raise SchemaError(f"{kind.value} row missing repository_url", lineno)

    if "github.com" not in url.lower():
        return [], "official", "non_github_host"
    try:
        return [normalize_repo_url(url)], "official", None
    except MalformedRepoUrl:
        return [], "official", "malformed_repo_url"


def load_source_records(
    path: str | Path,
    kind: SourceKind,
    on_drop: DropCallback | None = None,
) -> list[RawPair]:
    """One RawPair per (article, extracted repo) combination.

    Malformed rows raise SchemaError with their line number; rows
    dropped for content reasons (unofficial pwc links, non-GitHub
    hosts, linkless availability text) are reported through on_drop.
    """
    pairs: list[RawPair] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                row = json.loads(line)
            except json.JSONDecodeError as exc:
                raise SchemaError(f"invalid JSON: {exc}", lineno) from exc
            if not isinstance(row, dict):
                raise SchemaError("row is not an object", lineno)
            doi = row.get("doi")
            if not isinstance(doi, str) or not is_valid_doi(doi):
                raise SchemaError(f"missing or malformed DOI: {doi!r}", lineno)
            declared = row.get("source")
            if declared is not None and declared != kind.value:
                raise SchemaError(
                    f"row declares source {declared!r}, expected {kind.value!r}", lineno
                )
            refs, relationship, drop_reason = _row_repo_refs(row, kind, lineno)
            if drop_reason is not None:
                if on_drop is not None:
                    on_drop(lineno, drop_reason)
                continue
            for ref in refs:
                pairs.append(
                    RawPair(
                        article_doi=doi,
                        repo=ref,
                        source=kind,
                        relationship=relationship,
                    )
                )
    return pairs
