"""Stage orchestration: ingest, enrich, match, filter, teams, stats, report.

Each stage records completion in the store, checks its prerequisite,
and is idempotent, so a partial run resumes where it stopped.  Fixture
mode with a pinned as-of date is fully deterministic.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from datetime import date
from pathlib import Path

import yaml

from .analysis import FilterConfig, apply_analysis_filters, classify_contributors
from .annosvc import create_app
from .enrich import (
    Enricher,
    FetchCache,
    FixtureMetadataBackend,
    FixtureRepoBackend,
    LiveMetadataBackend,
    LiveRepoBackend,
    RateBudget,
    classify_article_type,
)
from .errors import (
    AdapterUnavailable,
    MissingPrerequisite,
    NotFound,
    RepoGone,
)
from .graphstore import GraphStore
from .ingest import load_source_records
from .matcher import ExternalModelAdapter, generate_candidates, score_pair
from .records import ArticleRecord, SourceKind
from .reports import (
    build_author_doc_rows,
    build_career_rows,
    build_pair_rows,
    citation_model,
    hindex_model,
    render_ccna_shares,
    render_chi_square,
    render_coding_frequency_counts,
    render_commit_durations,
    render_filter_audit,
    render_glm_csv,
    render_posthoc,
    render_team_composition,
)
from .stats import GlmSpec

logger = logging.getLogger(__name__)

STAGE_ORDER = ("ingest", "enrich", "match", "filter", "teams", "stats", "report")
_PREREQ = {
    "enrich": "ingest",
    "match": "enrich",
    "filter": "match",
    "teams": "filter",
    "stats": "teams",
    "report": "stats",
}

EDGE_FLOOR = 0.5  # candidates scoring below this are not stored as matches


@dataclass
class PipelineConfig:
    sources: dict[str, str] = field(default_factory=dict)
    backend: str = "fixture"
    fixture_dir: str = "fixtures/corpus/backend"
    output_dir: str = "out"
    seed: int = 0
    asof_date: date | None = None
    filters: FilterConfig = field(default_factory=FilterConfig)
    nb_dispersion: float | str = 1.0
    candidate_k: int = 3
    adapter_command: list[str] | None = None
    adapter_url: str | None = None
    requests_per_hour: int = 5000
    parallelism: int = 4
    resolver_base: str = "https://api.semanticscholar.org/graph/v1/paper"
    article_base: str = "https://api.openalex.org/works"
    github_base: str = "https://api.github.com"
    career_min_publications: int = 3
    career_max_dev_accounts: int = 3
    career_trim_percentiles: tuple[float, float] | None = (3.0, 97.0)

    def resolve_paths(self, base: Path) -> None:
        self.sources = {
            k: str((base / v)) if not Path(v).is_absolute() else v
            for k, v in self.sources.items()
        }
        if not Path(self.fixture_dir).is_absolute():
            self.fixture_dir = str(base / self.fixture_dir)
        if not Path(self.output_dir).is_absolute():
            self.output_dir = str(base / self.output_dir)


def load_config(path: str | Path) -> PipelineConfig:
    raw = yaml.safe_load(Path(path).read_text(encoding="utf-8")) or {}
    filters = FilterConfig(**raw.get("filters", {}))
    asof = raw.get("asof_date")
    if isinstance(asof, str):
        asof = date.fromisoformat(asof)
    trim = raw.get("career_trim_percentiles", (3.0, 97.0))
    if trim is not None:
        trim = tuple(trim)
    config = PipelineConfig(
        sources=dict(raw.get("sources", {})),
        backend=raw.get("backend", "fixture"),
        fixture_dir=raw.get("fixture_dir", "fixtures/corpus/backend"),
        output_dir=raw.get("output_dir", "out"),
        seed=int(raw.get("seed", 0)),
        asof_date=asof,
        filters=filters,
        nb_dispersion=raw.get("nb_dispersion", 1.0),
        candidate_k=int(raw.get("candidate_k", 3)),
        adapter_command=raw.get("adapter_command"),
        adapter_url=raw.get("adapter_url"),
        requests_per_hour=int(raw.get("requests_per_hour", 5000)),
        parallelism=int(raw.get("parallelism", 4)),
        career_min_publications=int(raw.get("career_min_publications", 3)),
        career_max_dev_accounts=int(raw.get("career_max_dev_accounts", 3)),
        career_trim_percentiles=trim,
    )
    config.resolve_paths(Path(path).resolve().parent)
    return config


class Pipeline:
    def __init__(self, config: PipelineConfig, stage_dir: str | Path):
        self.config = config
        self.stage_dir = Path(stage_dir)
        self.stage_dir.mkdir(parents=True, exist_ok=True)
        self.store = GraphStore(self.stage_dir / "graph.db")
        self._enricher: Enricher | None = None

    def close(self) -> None:
        self.store.close()

    def _require(self, stage: str) -> None:
        needs = _PREREQ.get(stage)
        if needs and not self.store.stage_completed(needs):
            raise MissingPrerequisite(stage, needs)

    @property
    def enricher(self) -> Enricher:
        if self._enricher is None:
            cache = FetchCache(self.stage_dir / "cache")
            if self.config.backend == "fixture":
                metadata = FixtureMetadataBackend(self.config.fixture_dir)
                repos = FixtureRepoBackend(self.config.fixture_dir)
                budget = None
            else:
                metadata = LiveMetadataBackend(
                    self.config.resolver_base, self.config.article_base
                )
                repos = LiveRepoBackend(self.config.github_base)
                budget = RateBudget(self.config.requests_per_hour)
            self._enricher = Enricher(
                metadata,
                repos,
                cache=cache,
                budget=budget,
                parallelism=self.config.parallelism,
            )
        return self._enricher

    # --- stages -------------------------------------------------------------

    def run_ingest(self) -> dict:
        self.store.clear_stage_audit("ingest")
        total = 0
        for kind_name in sorted(self.config.sources):
            kind = SourceKind(kind_name)
            path = self.config.sources[kind_name]

            def on_drop(line: int, reason: str, _kind=kind_name, _path=path) -> None:
                self.store.add_audit(
                    "ingest", reason, f"{_kind}:{line}", detail=str(_path)
                )

            for pair in load_source_records(path, kind, on_drop=on_drop):
                self.store.add_raw_pair(pair)
                total += 1
        self.store.record_stage("ingest", f"{total} raw pairs")
        logger.info("ingest: %d raw pairs", total)
        return {"raw_pairs": total}

    def run_enrich(self) -> dict:
        self._require("enrich")
        self.store.clear_stage_audit("enrich")
        enricher = self.enricher
        created = 0
        excluded = 0
        for raw in self.store.iter_raw_pairs():
            doi = enricher.resolve_doi(raw.article_doi)
            subject = f"{raw.article_doi}|{raw.repo}"
            try:
                article = enricher.fetch_article(doi)
            except NotFound as exc:
                self.store.add_audit("enrich", exc.reason, subject)
                excluded += 1
                continue
            try:
                repo = enricher.fetch_repo(raw.repo)
            except RepoGone:
                self.store.add_audit("enrich", "repo_gone", subject)
                excluded += 1
                continue
            article = ArticleRecord(
                doi=article.doi,
                title=article.title,
                article_type=classify_article_type(raw.source, article.article_type),
                domain=article.domain,
                is_open_access=article.is_open_access,
                publication_date=article.publication_date,
                citation_count=article.citation_count,
                authors=article.authors,
            )
            self.store.upsert_article(article)
            self.store.upsert_repo(repo)
            self.store.upsert_pair(doi, repo.repo, raw.source)
            created += 1
        self.store.record_stage("enrich", f"{created} pairs, {excluded} excluded")
        logger.info("enrich: %d pairs stored, %d excluded", created, excluded)
        return {"pairs": created, "excluded": excluded}

    def _adapter(self) -> ExternalModelAdapter | None:
        if self.config.adapter_command or self.config.adapter_url:
            return ExternalModelAdapter(
                command=self.config.adapter_command, url=self.config.adapter_url
            )
        return None

    def run_match(self) -> dict:
        self._require("match")
        self.store.clear_stage_audit("match")
        adapter = self._adapter()
        candidates_stored = 0
        edges_stored = 0
        for pair in self.store.iter_pairs(include_excluded=False):
            article = self.store.get_article(pair.doi)
            repo = self.store.get_repo(pair.repo)
            authors = {a.author_id: a for a in article.authors}
            devs = {c.dev_id: c for c in repo.contributors}
            candidates = generate_candidates(
                article.authors, repo.contributors, k=self.config.candidate_k
            )
            confidences = None
            if adapter is not None:
                texts = [
                    (
                        authors[c.author_id].display_name,
                        " ".join(
                            filter(
                                None,
                                (
                                    devs[c.dev_id].username,
                                    devs[c.dev_id].display_name,
                                    devs[c.dev_id].email,
                                ),
                            )
                        ),
                    )
                    for c in candidates
                ]
                try:
                    confidences = adapter.score(texts)
                except AdapterUnavailable as exc:
                    logger.warning("adapter unavailable, using rule scorer: %s", exc)
                    confidences = None
            if confidences is None:
                confidences = [
                    score_pair(authors[c.author_id], devs[c.dev_id]) for c in candidates
                ]
            for candidate, confidence in zip(candidates, confidences):
                self.store.upsert_candidate(
                    pair.pair_id, candidate.author_id, candidate.dev_id,
                    candidate.similarity,
                )
                candidates_stored += 1
                if confidence >= EDGE_FLOOR:
                    self.store.upsert_edge(
                        pair.pair_id, candidate.author_id, candidate.dev_id, confidence
                    )
                    edges_stored += 1
        self.store.record_stage(
            "match", f"{candidates_stored} candidates, {edges_stored} edges"
        )
        logger.info("match: %d candidates, %d edges", candidates_stored, edges_stored)
        return {"candidates": candidates_stored, "edges": edges_stored}

    def run_filter(self) -> dict:
        self._require("filter")
        self.store.clear_stage_audit("filter")
        self.store.clear_exclusions()  # re-derive, so re-runs are idempotent
        removed_conflicts = self.store.apply_one_to_one(stage="filter")
        analysis = apply_analysis_filters(self.store, self.config.filters)

        by_id = {p.pair_id: p for p in self.store.iter_pairs()}
        for pair_id, rule in analysis.removed_pairs:
            pair = by_id[pair_id]
            self.store.add_audit("filter", rule, f"{pair.doi}|{pair.repo}")
        for pair_id, author_id, dev_id, conf in analysis.removed_edges:
            pair = by_id[pair_id]
            self.store.add_audit(
                "filter", "confidence", f"{pair.doi}|{author_id}|{dev_id}",
                detail=f"{conf:.4f}",
            )

        edge_ids = []
        for pair_id, edges in analysis.edges_by_pair.items():
            for author_id, dev_id, conf in edges:
                rows = self.store.sql(
                    """
                    SELECT e.id FROM match_edges e
                    JOIN authors a ON a.id = e.author_id
                    JOIN contributors c ON c.id = e.contributor_id
                    WHERE e.pair_id = ? AND a.author_id = ? AND c.dev_id = ?
                    """,
                    (pair_id, author_id, dev_id),
                )
                edge_ids.append(rows[0]["id"])
        self.store.set_analysis_sets(analysis.pair_ids, edge_ids)

        audit = dict(analysis.audit)
        audit["one_to_one"] = removed_conflicts
        (self.stage_dir / "filter_audit.json").write_text(
            json.dumps(audit, sort_keys=True, indent=2) + "\n", encoding="utf-8"
        )
        self.store.record_stage("filter", json.dumps(audit, sort_keys=True))
        logger.info("filter: %d analysis pairs, audit %s", len(analysis.pair_ids), audit)
        return {"analysis_pairs": len(analysis.pair_ids), "audit": audit}

    def run_teams(self) -> dict:
        self._require("teams")
        self.store.execute("DELETE FROM team_compositions")
        by_id = {p.pair_id: p for p in self.store.iter_pairs()}
        count = 0
        for pair_id in self.store.analysis_pair_ids():
            pair = by_id[pair_id]
            article = self.store.get_article(pair.doi)
            repo = self.store.get_repo(pair.repo)
            team = classify_contributors(
                [a.author_id for a in article.authors],
                repo.contributors,
                self.store.analysis_edges_for_pair(pair_id),
                confidence_floor=self.config.filters.confidence_floor,
            )
            self.store.execute(
                """
                INSERT INTO team_compositions
                    (pair_id, total_authors, cc_a, ncc_a, cc_na)
                VALUES (?, ?, ?, ?, ?)
                """,
                (pair_id, team.total_authors, team.cc_a, team.ncc_a, team.cc_na),
            )
            count += 1
        self.store.record_stage("teams", f"{count} compositions")
        logger.info("teams: %d compositions", count)
        return {"compositions": count}

    def _asof(self) -> date:
        return self.config.asof_date or date.today()

    def run_stats(self) -> dict:
        self._require("stats")
        asof = self._asof()
        pair_rows = build_pair_rows(self.store, asof)
        author_docs = build_author_doc_rows(self.store, self.config.filters)
        careers = build_career_rows(
            self.store,
            author_docs,
            min_publications=self.config.career_min_publications,
            max_dev_accounts=self.config.career_max_dev_accounts,
            trim_percentiles=self.config.career_trim_percentiles,
        )
        summary = {
            "asof": asof.isoformat(),
            "analysis_pairs": len(pair_rows),
            "author_documents": len(author_docs),
            "career_authors": len(careers),
        }
        (self.stage_dir / "stats_summary.json").write_text(
            json.dumps(summary, sort_keys=True, indent=2) + "\n", encoding="utf-8"
        )
        self.store.record_stage("stats", json.dumps(summary, sort_keys=True))
        logger.info("stats: %s", summary)
        return summary

    def run_report(self) -> dict:
        self._require("report")
        asof = self._asof()
        out = Path(self.config.output_dir)
        out.mkdir(parents=True, exist_ok=True)

        pair_rows = build_pair_rows(self.store, asof)
        author_docs = build_author_doc_rows(self.store, self.config.filters)
        careers = build_career_rows(
            self.store,
            author_docs,
            min_publications=self.config.career_min_publications,
            max_dev_accounts=self.config.career_max_dev_accounts,
            trim_percentiles=self.config.career_trim_percentiles,
        )

        audit_path = self.stage_dir / "filter_audit.json"
        audit = json.loads(audit_path.read_text()) if audit_path.exists() else {}
        render_filter_audit(out / "filter_audit.csv", audit)

        render_team_composition(out / "team_composition.csv", self.store, pair_rows)
        render_commit_durations(out / "commit_duration.csv", pair_rows)

        nb_spec = GlmSpec(family="negative_binomial", dispersion=self.config.nb_dispersion)
        for control, name in (
            (None, "overall"),
            ("oa", "oa_status"),
            ("domain", "domain"),
            ("type", "article_type"),
        ):
            fit = citation_model(pair_rows, control, nb_spec)
            render_glm_csv(out / f"citations_glm_{name}.csv", fit)

        render_chi_square(out / "chisq_positions.csv", author_docs, "position")
        render_chi_square(out / "chisq_corresponding.csv", author_docs, "corresponding")
        render_posthoc(out / "posthoc_positions.csv", author_docs, "position")
        render_posthoc(out / "posthoc_corresponding.csv", author_docs, "corresponding")

        gaussian_spec = GlmSpec(family="gaussian")
        for control, name in (
            (None, "overall"),
            ("position", "position"),
            ("domain", "domain"),
            ("type", "article_type"),
        ):
            fit = hindex_model(careers, control, gaussian_spec)
            render_glm_csv(out / f"hindex_glm_{name}.csv", fit)

        render_coding_frequency_counts(out / "coding_frequency_counts.csv", careers)
        render_ccna_shares(out / "ccna_shares.csv", self.store, self.config.filters)

        self.store.record_stage("report", str(out))
        logger.info("report: wrote %s", out)
        return {"output_dir": str(out)}

    def run_all(self) -> dict:
        results = {}
        results["ingest"] = self.run_ingest()
        results["enrich"] = self.run_enrich()
        results["match"] = self.run_match()
        results["filter"] = self.run_filter()
        results["teams"] = self.run_teams()
        results["stats"] = self.run_stats()
        results["report"] = self.run_report()
        return results

    def run_stage(self, stage: str) -> dict:
        runner = {
            "ingest": self.run_ingest,
            "enrich": self.run_enrich,
            "match": self.run_match,
            "filter": self.run_filter,
            "teams": self.run_teams,
            "stats": self.run_stats,
            "report": self.run_report,
            "all": self.run_all,
        }[stage]
        return runner()

    def serve_annotations(self, host: str = "127.0.0.1", port: int = 8765,
                          static_dir: str | Path | None = None):
        import uvicorn

        app = create_app(self.store, static_dir=static_dir)
        uvicorn.run(app, host=host, port=port, log_level="info")
