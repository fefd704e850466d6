"""Report tables: compositions, regressions, tests, shares, durations.

Every writer emits CSV with a fixed column order, fixed float precision,
and rows sorted on natural keys, so a fixture run is byte-reproducible.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass
from datetime import date
from pathlib import Path
from typing import Sequence

import numpy as np

from .analysis import (
    FilterConfig,
    TeamComposition,
    coding_frequency,
    contribution_shares,
    describe,
    most_common_attribute,
    percentile,
    summarize_compositions,
)
from .errors import DomainError, Singular, TooFewPublications, ZeroTotal
from .graphstore import GraphStore
from .records import ARTICLE_TYPES, DOMAINS, POSITIONS
from .stats import GlmFit, GlmSpec, binomial_test_two_sided, bonferroni, chi_square_independence, fit_glm

logger = logging.getLogger(__name__)

DAYS_PER_YEAR = 365.25

GLM_COLUMNS = ("variable", "coef", "std_err", "z", "p", "ci_low", "ci_high", "sig")

# Reference categories omitted from the dummy encodings.
REF_POSITION = "first"
REF_DOMAIN = "Health Sciences"
REF_TYPE = "preprint"

_DOMAIN_LEVELS = [d for d in DOMAINS if d != REF_DOMAIN]
_TYPE_LEVELS = [t for t in ARTICLE_TYPES if t != REF_TYPE]
_POSITION_LEVELS = [p for p in POSITIONS if p != REF_POSITION]

_SHARE_QUANTILES = (25.0, 50.0, 75.0)
_DURATION_QUANTILES = (10.0, 25.0, 50.0, 75.0, 90.0)


def significance_stars(p: float) -> str:
    if p < 0.001:
        return "***"
    if p < 0.01:
        return "**"
    if p < 0.05:
        return "*"
    return ""


def _fmt(value: float, precision: int = 4) -> str:
    return f"{value:.{precision}f}"


def write_csv(path: Path, header: Sequence[str], rows: Sequence[Sequence]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


# --- per-pair and per-author observation rows --------------------------------


@dataclass
class PairRow:
    pair_id: int
    doi: str
    citations: int
    total_authors: int
    cc_a: int
    cc_na: int
    years: float
    is_open_access: bool
    domain: str
    article_type: str
    duration_days: int


@dataclass
class AuthorDocRow:
    pair_id: int
    author_id: str
    position: str
    is_corresponding: bool
    coded: bool
    domain: str
    article_type: str
    is_open_access: bool
    publication_date: date


@dataclass
class CareerRow:
    author_id: str
    h_index: int
    works_count: int
    category: str
    coded_fraction: float
    position: str
    domain: str
    article_type: str


def years_since(publication: date, asof: date) -> float:
    return (asof - publication).days / DAYS_PER_YEAR


def build_pair_rows(store: GraphStore, asof: date) -> list[PairRow]:
    rows = []
    compositions = {
        r["pair_id"]: TeamComposition(
            r["total_authors"], r["cc_a"], r["ncc_a"], r["cc_na"]
        )
        for r in store.sql("SELECT * FROM team_compositions")
    }
    by_id = {p.pair_id: p for p in store.iter_pairs()}
    for pair_id in store.analysis_pair_ids():
        pair = by_id[pair_id]
        article = store.get_article(pair.doi)
        repo = store.get_repo(pair.repo)
        team = compositions[pair_id]
        rows.append(
            PairRow(
                pair_id=pair_id,
                doi=pair.doi,
                citations=article.citation_count,
                total_authors=team.total_authors,
                cc_a=team.cc_a,
                cc_na=team.cc_na,
                years=years_since(article.publication_date, asof),
                is_open_access=article.is_open_access,
                domain=article.domain,
                article_type=article.article_type,
                duration_days=repo.commit_duration_days,
            )
        )
    rows.sort(key=lambda r: r.doi)
    return rows


def build_author_doc_rows(store: GraphStore, config: FilterConfig) -> list[AuthorDocRow]:
    rows = []
    by_id = {p.pair_id: p for p in store.iter_pairs()}
    for pair_id in store.analysis_pair_ids():
        pair = by_id[pair_id]
        article = store.get_article(pair.doi)
        repo = store.get_repo(pair.repo)
        commits_by_dev = {c.dev_id: c.commits for c in repo.contributors}
        matched = {
            author_id
            for author_id, dev_id, conf in store.analysis_edges_for_pair(pair_id)
            if conf >= config.confidence_floor and commits_by_dev.get(dev_id, 0) >= 1
        }
        for slot in article.authors:
            rows.append(
                AuthorDocRow(
                    pair_id=pair_id,
                    author_id=slot.author_id,
                    position=slot.position,
                    is_corresponding=slot.is_corresponding,
                    coded=slot.author_id in matched,
                    domain=article.domain,
                    article_type=article.article_type,
                    is_open_access=article.is_open_access,
                    publication_date=article.publication_date,
                )
            )
    rows.sort(key=lambda r: (r.pair_id, r.author_id))
    return rows


def build_career_rows(
    store: GraphStore,
    author_docs: Sequence[AuthorDocRow],
    min_publications: int = 3,
    max_dev_accounts: int = 3,
    trim_percentiles: tuple[float, float] | None = (3.0, 97.0),
) -> list[CareerRow]:
    """Career-level observations: authors with enough in-dataset pairs,
    a bounded number of matched accounts, h-index inside the trim band,
    and most-common attributes with ties broken by recency."""
    docs_by_author: dict[str, list[AuthorDocRow]] = {}
    for row in author_docs:
        docs_by_author.setdefault(row.author_id, []).append(row)

    dev_links: dict[str, set[str]] = {}
    for pair_id in store.analysis_pair_ids():
        for author_id, dev_id, _ in store.analysis_edges_for_pair(pair_id):
            dev_links.setdefault(author_id, set()).add(dev_id)

    metrics = {
        r["author_id"]: (r["h_index"], r["works_count"])
        for r in store.sql("SELECT author_id, h_index, works_count FROM authors")
    }

    eligible: list[CareerRow] = []
    for author_id in sorted(docs_by_author):
        docs = docs_by_author[author_id]
        if len(docs) < min_publications:
            continue
        if len(dev_links.get(author_id, ())) > max_dev_accounts:
            continue
        freq = coding_frequency([d.coded for d in docs])
        h_index, works_count = metrics[author_id]
        eligible.append(
            CareerRow(
                author_id=author_id,
                h_index=h_index,
                works_count=works_count,
                category=freq.category,
                coded_fraction=freq.coded_fraction,
                position=most_common_attribute(
                    [(d.position, d.publication_date) for d in docs]
                ),
                domain=most_common_attribute(
                    [(d.domain, d.publication_date) for d in docs]
                ),
                article_type=most_common_attribute(
                    [(d.article_type, d.publication_date) for d in docs]
                ),
            )
        )

    if trim_percentiles is not None and eligible:
        values = [float(r.h_index) for r in eligible]
        low = percentile(values, trim_percentiles[0])
        high = percentile(values, trim_percentiles[1])
        eligible = [r for r in eligible if low <= r.h_index <= high]
    return eligible


# --- GLM table rendering ----------------------------------------------------------


def render_glm_csv(path: Path, fit: GlmFit | str) -> None:
    """Write one regression table; a string means the model was not fit
    and is recorded as a deterministic marker row."""
    if isinstance(fit, str):
        write_csv(path, GLM_COLUMNS, [[f"(not_fit: {fit})", "", "", "", "", "", "", ""]])
        return
    rows = []
    for i, name in enumerate(fit.column_names):
        p = fit.p_values[i]
        rows.append(
            [
                name,
                _fmt(fit.coefficients[i]),
                _fmt(fit.std_errors[i]),
                _fmt(fit.z_values[i]),
                _fmt(p),
                _fmt(fit.ci_low[i]),
                _fmt(fit.ci_high[i]),
                significance_stars(p),
            ]
        )
    write_csv(path, GLM_COLUMNS, rows)


def _safe_fit(design, response, spec, names) -> GlmFit | str:
    X = np.asarray(design, dtype=float)
    try:
        return fit_glm(X, response, spec, column_names=names)
    except (Singular, DomainError, ValueError) as exc:
        logger.warning("model not fit (%s): %s", names[:3], exc)
        return str(exc)


def citation_model(
    rows: Sequence[PairRow],
    control: str | None,
    spec: GlmSpec,
) -> GlmFit | str:
    """Citations on team composition, optionally interacted with one
    categorical control (open access, domain, or article type)."""
    if not rows:
        return "empty analysis set"
    names = ["const", "total_authors", "cc_a", "cc_na", "years_since_publication"]
    columns = [
        np.ones(len(rows)),
        np.array([r.total_authors for r in rows], dtype=float),
        np.array([r.cc_a for r in rows], dtype=float),
        np.array([r.cc_na for r in rows], dtype=float),
        np.array([r.years for r in rows], dtype=float),
    ]
    cc_a = columns[2]
    cc_na = columns[3]

    def add_dummies(levels, selector, label_fn):
        for level in levels:
            indicator = np.array([1.0 if selector(r) == level else 0.0 for r in rows])
            columns.append(indicator)
            names.append(label_fn(level))
            columns.append(cc_a * indicator)
            names.append(f"cc_a x {label_fn(level)}")
            columns.append(cc_na * indicator)
            names.append(f"cc_na x {label_fn(level)}")

    if control == "oa":
        indicator = np.array([1.0 if r.is_open_access else 0.0 for r in rows])
        columns += [indicator, cc_a * indicator, cc_na * indicator]
        names += ["is_open_access", "cc_a x is_open_access", "cc_na x is_open_access"]
    elif control == "domain":
        add_dummies(_DOMAIN_LEVELS, lambda r: r.domain, lambda l: f"domain={l}")
    elif control == "type":
        add_dummies(_TYPE_LEVELS, lambda r: r.article_type, lambda l: f"type={l}")

    y = np.array([r.citations for r in rows], dtype=float)
    return _safe_fit(np.column_stack(columns), y, spec, names)


_CATEGORY_LEVELS = ("any", "majority", "always")  # reference: none


def hindex_model(
    rows: Sequence[CareerRow],
    control: str | None,
    spec: GlmSpec,
) -> GlmFit | str:
    """Log-link Gaussian model of author h-index on coding category and
    works count, optionally interacted with a career-level control."""
    if not rows:
        return "empty career set"
    names = ["const", "works_count"]
    columns = [
        np.ones(len(rows)),
        np.array([r.works_count for r in rows], dtype=float),
    ]
    cat_indicators = {}
    for cat in _CATEGORY_LEVELS:
        indicator = np.array([1.0 if r.category == cat else 0.0 for r in rows])
        cat_indicators[cat] = indicator
        columns.append(indicator)
        names.append(f"{cat}_coding")

    def add_control(levels, selector, label_fn):
        for level in levels:
            indicator = np.array([1.0 if selector(r) == level else 0.0 for r in rows])
            columns.append(indicator)
            names.append(label_fn(level))
            for cat in _CATEGORY_LEVELS:
                columns.append(cat_indicators[cat] * indicator)
                names.append(f"{cat}_coding x {label_fn(level)}")

    if control == "position":
        add_control(_POSITION_LEVELS, lambda r: r.position, lambda l: f"position={l}")
    elif control == "domain":
        add_control(_DOMAIN_LEVELS, lambda r: r.domain, lambda l: f"domain={l}")
    elif control == "type":
        add_control(_TYPE_LEVELS, lambda r: r.article_type, lambda l: f"type={l}")

    y = np.array([r.h_index for r in rows], dtype=float)
    return _safe_fit(np.column_stack(columns), y, spec, names)


# --- composition, post-hoc, share, and duration tables ------------------------------


def _composition_groups(store: GraphStore, pair_rows: Sequence[PairRow]):
    teams = {
        r["pair_id"]: TeamComposition(
            r["total_authors"], r["cc_a"], r["ncc_a"], r["cc_na"]
        )
        for r in store.sql("SELECT * FROM team_compositions")
    }
    groups: list[tuple[str, str, list[TeamComposition]]] = []
    groups.append(
        ("OA Status", "Closed", [teams[r.pair_id] for r in pair_rows if not r.is_open_access])
    )
    groups.append(
        ("OA Status", "Open", [teams[r.pair_id] for r in pair_rows if r.is_open_access])
    )
    for domain in DOMAINS:
        groups.append(
            ("Domain", domain, [teams[r.pair_id] for r in pair_rows if r.domain == domain])
        )
    for atype in ARTICLE_TYPES:
        groups.append(
            ("Article Type", atype,
             [teams[r.pair_id] for r in pair_rows if r.article_type == atype])
        )
    groups.append(("Overall", "Overall", [teams[r.pair_id] for r in pair_rows]))
    return groups


def render_team_composition(path: Path, store: GraphStore, pair_rows: Sequence[PairRow]):
    header = [
        "control", "subset", "n_pairs",
        "total_authors_mean", "total_authors_std",
        "ncc_a_mean", "ncc_a_std",
        "cc_a_mean", "cc_a_std",
        "cc_na_mean", "cc_na_std",
    ]
    rows = []
    for control, subset, comps in _composition_groups(store, pair_rows):
        if not comps:
            rows.append([control, subset, 0] + [""] * 8)
            continue
        summary = summarize_compositions(comps)
        rows.append(
            [
                control, subset, len(comps),
                _fmt(summary["total_authors"].mean, 2), _fmt(summary["total_authors"].std, 2),
                _fmt(summary["ncc_a"].mean, 2), _fmt(summary["ncc_a"].std, 2),
                _fmt(summary["cc_a"].mean, 2), _fmt(summary["cc_a"].std, 2),
                _fmt(summary["cc_na"].mean, 2), _fmt(summary["cc_na"].std, 2),
            ]
        )
    write_csv(path, header, rows)


def _control_subsets(rows: Sequence[AuthorDocRow]):
    yield "Domain", [(d, [r for r in rows if r.domain == d]) for d in DOMAINS]
    yield "Article Type", [
        (t, [r for r in rows if r.article_type == t]) for t in ARTICLE_TYPES
    ]
    yield "Open Access Status", [
        ("Closed Access", [r for r in rows if not r.is_open_access]),
        ("Open Access", [r for r in rows if r.is_open_access]),
    ]
    yield "Overall", [("Overall", list(rows))]


def render_chi_square(
    path: Path,
    rows: Sequence[AuthorDocRow],
    grouping: str,
) -> None:
    """Independence tests between a grouping (position or corresponding
    status) and coded status, overall and per control subset."""
    header = ["control", "subset", "statistic", "dof", "p", "sig"]
    out = []
    for control, subsets in _control_subsets(rows):
        for subset_name, subset_rows in subsets:
            table = _grouping_table(subset_rows, grouping)
            if table is None:
                out.append([control, subset_name, "", "", "", ""])
                continue
            try:
                result = chi_square_independence(table)
            except Exception:
                out.append([control, subset_name, "", "", "", ""])
                continue
            out.append(
                [
                    control, subset_name,
                    _fmt(result.statistic), result.dof,
                    _fmt(result.p_value), significance_stars(result.p_value),
                ]
            )
    write_csv(path, header, out)


def _grouping_levels(grouping: str) -> list:
    if grouping == "position":
        return list(POSITIONS)
    return [True, False]  # corresponding


def _grouping_value(row: AuthorDocRow, grouping: str):
    return row.position if grouping == "position" else row.is_corresponding


def _grouping_table(rows: Sequence[AuthorDocRow], grouping: str):
    levels = _grouping_levels(grouping)
    table = []
    for level in levels:
        level_rows = [r for r in rows if _grouping_value(r, grouping) == level]
        coded = sum(1 for r in level_rows if r.coded)
        table.append([coded, len(level_rows) - coded])
    if any(sum(r) == 0 for r in table):
        return None
    if sum(r[0] for r in table) == 0 or sum(r[1] for r in table) == 0:
        return None
    return table


def render_posthoc(
    path: Path,
    rows: Sequence[AuthorDocRow],
    grouping: str,
) -> None:
    """Per-subset exact binomial tests of each level's coding proportion
    against the subset's pooled proportion, Bonferroni-corrected within
    the subset family."""
    level_label = "position" if grouping == "position" else "is_corresponding"
    header = ["control", "subset", level_label, "coding", "total", "p_corrected", "sig"]
    levels = _grouping_levels(grouping)
    out = []
    for control, subsets in _control_subsets(rows):
        for subset_name, subset_rows in subsets:
            pooled_total = len(subset_rows)
            pooled_coded = sum(1 for r in subset_rows if r.coded)
            testable = 0 < pooled_coded < pooled_total
            p0 = pooled_coded / pooled_total if pooled_total else 0.0
            for level in levels:
                level_rows = [
                    r for r in subset_rows if _grouping_value(r, grouping) == level
                ]
                k = sum(1 for r in level_rows if r.coded)
                n = len(level_rows)
                label = level if grouping == "position" else ("yes" if level else "no")
                if n == 0 or not testable:
                    out.append([control, subset_name, label, k, n, "", ""])
                    continue
                result = binomial_test_two_sided(k, n, p0)
                corrected = bonferroni(result.p_value, len(levels))
                out.append(
                    [
                        control, subset_name, label, k, n,
                        _fmt(corrected), significance_stars(corrected),
                    ]
                )
    write_csv(path, header, out)


def render_coding_frequency_counts(path: Path, careers: Sequence[CareerRow]) -> None:
    header = ["category", "subset", "total_authors", "any_code", "majority_code", "always_code"]
    out = []

    def block(category: str, levels, selector):
        for level in levels:
            subset = [c for c in careers if selector(c) == level]
            out.append(
                [
                    category, level, len(subset),
                    sum(1 for c in subset if c.category == "any"),
                    sum(1 for c in subset if c.category == "majority"),
                    sum(1 for c in subset if c.category == "always"),
                ]
            )

    block("By Common Domain", DOMAINS, lambda c: c.domain)
    block("By Document Type", ARTICLE_TYPES, lambda c: c.article_type)
    block("By Author Position", POSITIONS, lambda c: c.position)
    out.append(
        [
            "Total", "", len(careers),
            sum(1 for c in careers if c.category == "any"),
            sum(1 for c in careers if c.category == "majority"),
            sum(1 for c in careers if c.category == "always"),
        ]
    )
    write_csv(path, header, out)


def render_ccna_shares(path: Path, store: GraphStore, config: FilterConfig) -> None:
    """Distribution of unmatched committing accounts' contribution
    shares across the analysis pairs."""
    shares = {"commit": [], "addition": [], "deletion": [], "abs": []}
    by_id = {p.pair_id: p for p in store.iter_pairs()}
    for pair_id in store.analysis_pair_ids():
        pair = by_id[pair_id]
        repo = store.get_repo(pair.repo)
        matched_devs = {
            dev_id
            for _, dev_id, conf in store.analysis_edges_for_pair(pair_id)
            if conf >= config.confidence_floor
        }
        totals = (
            sum(c.commits for c in repo.contributors),
            sum(c.additions for c in repo.contributors),
            sum(c.deletions for c in repo.contributors),
        )
        for contributor in repo.contributors:
            if contributor.commits < 1 or contributor.dev_id in matched_devs:
                continue
            try:
                share = contribution_shares(contributor, *totals)
            except ZeroTotal:
                continue
            shares["commit"].append(share.commit_share)
            shares["addition"].append(share.addition_share)
            shares["deletion"].append(share.deletion_share)
            shares["abs"].append(share.abs_share)

    header = ["metric", "count", "mean", "std", "min", "25%", "50%", "75%", "max"]
    rows = []
    for metric in ("commit", "addition", "deletion", "abs"):
        values = shares[metric]
        if not values:
            rows.append([f"{metric}_share", 0, "", "", "", "", "", "", ""])
            continue
        stats = describe(values, _SHARE_QUANTILES)
        rows.append(
            [
                f"{metric}_share", stats["count"],
                _fmt(stats["mean"]), _fmt(stats["std"]), _fmt(stats["min"]),
                _fmt(stats["25%"]), _fmt(stats["50%"]), _fmt(stats["75%"]),
                _fmt(stats["max"]),
            ]
        )
    write_csv(path, header, rows)


def render_commit_durations(path: Path, pair_rows: Sequence[PairRow]) -> None:
    header = [
        "article_type", "count", "mean", "std", "min",
        "10%", "25%", "50%", "75%", "90%", "max",
    ]
    rows = []
    for atype in ARTICLE_TYPES:
        values = [float(r.duration_days) for r in pair_rows if r.article_type == atype]
        if not values:
            rows.append([atype, 0] + [""] * 9)
            continue
        stats = describe(values, _DURATION_QUANTILES)
        rows.append(
            [
                atype, stats["count"],
                _fmt(stats["mean"], 1), _fmt(stats["std"], 1), _fmt(stats["min"], 0),
                _fmt(stats["10%"], 1), _fmt(stats["25%"], 1), _fmt(stats["50%"], 1),
                _fmt(stats["75%"], 1), _fmt(stats["90%"], 1), _fmt(stats["max"], 0),
            ]
        )
    write_csv(path, header, rows)


def render_filter_audit(path: Path, audit_counts: dict[str, int]) -> None:
    header = ["rule", "removed_count"]
    rows = [[rule, audit_counts.get(rule, 0)] for rule in sorted(audit_counts)]
    write_csv(path, header, rows)
