"""Analysis filters, team composition, contribution shares, career metrics."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from datetime import date, timedelta
from typing import Iterable, Mapping, Sequence

from .errors import TooFewPublications, ZeroTotal
from .graphstore import GraphStore
from .languages import has_programming_language_files
from .records import ContributorStat

# Pairs are filtered in this order; each rule is a pure predicate, so
# the survivor set is order-independent but audit attribution follows
# the order here.  The confidence rule removes match edges, not pairs.
RULE_ORDER = ("code_files", "citations", "commit_window", "team_size", "confidence")


@dataclass
class FilterConfig:
    min_citations: int = 1
    commit_window_days: int = 90
    min_authors: int = 3
    max_authors: int = 11
    confidence_floor: float = 0.97
    require_code_files: bool = True

    def __post_init__(self):
        if self.min_authors > self.max_authors:
            raise ValueError("min_authors must not exceed max_authors")
        if not 0.0 <= self.confidence_floor <= 1.0:
            raise ValueError("confidence_floor must lie in [0, 1]")


@dataclass
class TeamComposition:
    total_authors: int
    cc_a: int
    ncc_a: int
    cc_na: int

    def __post_init__(self):
        if min(self.total_authors, self.cc_a, self.ncc_a, self.cc_na) < 0:
            raise ValueError("composition counts must be non-negative")
        if self.cc_a + self.ncc_a != self.total_authors:
            raise ValueError("cc_a + ncc_a must equal total_authors")


@dataclass
class ContributionShare:
    commit_share: float
    addition_share: float
    deletion_share: float
    abs_share: float


@dataclass
class CodingFrequency:
    category: str
    coded_fraction: float


@dataclass
class AnalysisSet:
    """Pairs and edges that survive the filters, plus per-rule removals."""

    pair_ids: list[int] = field(default_factory=list)
    edges_by_pair: dict[int, list[tuple[str, str, float]]] = field(default_factory=dict)
    audit: dict[str, int] = field(default_factory=dict)
    removed_pairs: list[tuple[int, str]] = field(default_factory=list)
    removed_edges: list[tuple[int, str, str, float]] = field(default_factory=list)


def apply_analysis_filters(store: GraphStore, config: FilterConfig) -> AnalysisSet:
    """Apply the rule chain to every active (one-to-one) pair.

    Audit counts report pairs removed per rule, attributed to the first
    failing rule in RULE_ORDER; the confidence entry counts match edges
    dropped below the floor on surviving pairs.
    """
    result = AnalysisSet(audit={rule: 0 for rule in RULE_ORDER})

    def remove(pair_id: int, rule: str) -> None:
        result.audit[rule] += 1
        result.removed_pairs.append((pair_id, rule))

    for pair in store.iter_pairs(include_excluded=False):
        article = store.get_article(pair.doi)
        repo = store.get_repo(pair.repo)

        if config.require_code_files and not has_programming_language_files(
            repo.language_bytes
        ):
            remove(pair.pair_id, "code_files")
            continue
        if article.citation_count < config.min_citations:
            remove(pair.pair_id, "citations")
            continue
        window_end = article.publication_date + timedelta(days=config.commit_window_days)
        if repo.last_commit_at > window_end:
            remove(pair.pair_id, "commit_window")
            continue
        if not config.min_authors <= len(article.authors) <= config.max_authors:
            remove(pair.pair_id, "team_size")
            continue

        kept_edges = []
        for author_id, dev_id, confidence in store.edges_for_pair(pair.pair_id):
            if confidence < config.confidence_floor:
                result.audit["confidence"] += 1
                result.removed_edges.append((pair.pair_id, author_id, dev_id, confidence))
            else:
                kept_edges.append((author_id, dev_id, confidence))
        result.pair_ids.append(pair.pair_id)
        result.edges_by_pair[pair.pair_id] = kept_edges
    return result


def classify_contributors(
    author_ids: Sequence[str],
    contributors: Sequence[ContributorStat],
    edges: Iterable[tuple[str, str, float]],
    confidence_floor: float = 0.97,
) -> TeamComposition:
    """Split one pair's people into CC-A / NCC-A / CC-NA.

    A code-contributing author is matched (at or above the floor) to at
    least one account with a commit on this repository; committing
    accounts matched to no author are the pair's CC-NA count.
    """
    commits_by_dev = {c.dev_id: c.commits for c in contributors}
    matched_authors: set[str] = set()
    matched_devs: set[str] = set()
    for author_id, dev_id, confidence in edges:
        if confidence < confidence_floor:
            continue
        if author_id not in author_ids or dev_id not in commits_by_dev:
            continue
        if commits_by_dev[dev_id] >= 1:
            matched_authors.add(author_id)
            matched_devs.add(dev_id)
    committing_devs = {d for d, commits in commits_by_dev.items() if commits >= 1}
    cc_a = len(matched_authors)
    return TeamComposition(
        total_authors=len(author_ids),
        cc_a=cc_a,
        ncc_a=len(author_ids) - cc_a,
        cc_na=len(committing_devs - matched_devs),
    )


def contribution_shares(
    contributor: ContributorStat,
    total_commits: int,
    total_additions: int,
    total_deletions: int,
) -> ContributionShare:
    """Contributor activity as a proportion of repository totals; the
    absolute share uses additions + deletions on both sides."""
    total_abs = total_additions + total_deletions
    if min(total_commits, total_additions, total_deletions) <= 0 or total_abs <= 0:
        raise ZeroTotal("repository totals must all be positive")
    return ContributionShare(
        commit_share=contributor.commits / total_commits,
        addition_share=contributor.additions / total_additions,
        deletion_share=contributor.deletions / total_deletions,
        abs_share=(contributor.additions + contributor.deletions) / total_abs,
    )


def compute_h_index(citations: Sequence[int]) -> int:
    """Largest h such that at least h entries are >= h."""
    ordered = sorted(citations, reverse=True)
    h = 0
    for i, c in enumerate(ordered, start=1):
        if c >= i:
            h = i
        else:
            break
    return h


def coding_frequency(coded_flags: Sequence[bool]) -> CodingFrequency:
    """Career coding-category from per-pair coded flags.

    none: f = 0; any: 0 < f < 1/2; majority: 1/2 <= f < 1; always: f = 1.
    Requires at least three publications.
    """
    n = len(coded_flags)
    if n < 3:
        raise TooFewPublications(f"need >= 3 publications, got {n}")
    coded = sum(bool(flag) for flag in coded_flags)
    fraction = coded / n
    if coded == 0:
        category = "none"
    elif coded == n:
        category = "always"
    elif fraction >= 0.5:
        category = "majority"
    else:
        category = "any"
    return CodingFrequency(category=category, coded_fraction=fraction)


def most_common_attribute(values_with_dates: Sequence[tuple[str, date]]) -> str:
    """Modal value; ties go to the tied value seen most recently."""
    if not values_with_dates:
        raise ValueError("need at least one value")
    counts: dict[str, int] = {}
    latest: dict[str, date] = {}
    for value, when in values_with_dates:
        counts[value] = counts.get(value, 0) + 1
        if value not in latest or when > latest[value]:
            latest[value] = when
    top = max(counts.values())
    tied = [v for v, c in counts.items() if c == top]
    return max(tied, key=lambda v: latest[v])


@dataclass
class FieldSummary:
    mean: float
    std: float
    single_observation: bool = False


def summarize_compositions(
    compositions: Sequence[TeamComposition],
) -> dict[str, FieldSummary]:
    """Mean and sample (n-1) standard deviation per composition field.

    A single observation has no sample deviation; it is reported as 0
    with the single_observation flag set.
    """
    if not compositions:
        raise ValueError("group must be non-empty")
    out: dict[str, FieldSummary] = {}
    n = len(compositions)
    for name in ("total_authors", "cc_a", "ncc_a", "cc_na"):
        values = [getattr(c, name) for c in compositions]
        mean = sum(values) / n
        if n == 1:
            out[name] = FieldSummary(mean=mean, std=0.0, single_observation=True)
        else:
            var = sum((v - mean) ** 2 for v in values) / (n - 1)
            out[name] = FieldSummary(mean=mean, std=math.sqrt(var))
    return out


def percentile(values: Sequence[float], q: float) -> float:
    """Linear-interpolation percentile (inclusive), q in [0, 100]."""
    if not values:
        raise ValueError("need at least one value")
    ordered = sorted(values)
    if len(ordered) == 1:
        return float(ordered[0])
    rank = (q / 100.0) * (len(ordered) - 1)
    lo = math.floor(rank)
    hi = math.ceil(rank)
    if lo == hi:
        return float(ordered[lo])
    frac = rank - lo
    return ordered[lo] * (1 - frac) + ordered[hi] * frac


def describe(values: Sequence[float], quantiles: Sequence[float]) -> dict[str, float]:
    """count/mean/std plus the requested quantiles, for the share and
    commit-duration tables."""
    n = len(values)
    if n == 0:
        return {"count": 0}
    mean = sum(values) / n
    std = math.sqrt(sum((v - mean) ** 2 for v in values) / (n - 1)) if n > 1 else 0.0
    out = {"count": n, "mean": mean, "std": std, "min": min(values), "max": max(values)}
    for q in quantiles:
        out[f"{q:g}%"] = percentile(values, q)
    return out
