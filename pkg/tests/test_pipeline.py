"""Stage orchestration: prerequisites, resumability, empty-set reports."""

import json
from pathlib import Path

import pytest

from softcredit.errors import MissingPrerequisite
from softcredit.pipeline import Pipeline, load_config

ROOT = Path(__file__).resolve().parents[1]
CORPUS_CONFIG = ROOT / "fixtures" / "corpus" / "config.yaml"


@pytest.fixture
def pipeline(tmp_path):
    config = load_config(CORPUS_CONFIG)
    config.output_dir = str(tmp_path / "out")
    p = Pipeline(config, tmp_path / "stage")
    yield p
    p.close()


def test_stage_requires_prerequisite(pipeline):
    with pytest.raises(MissingPrerequisite):
        pipeline.run_stats()
    with pytest.raises(MissingPrerequisite):
        pipeline.run_enrich()


def test_stages_compose_to_all(pipeline):
    pipeline.run_ingest()
    pipeline.run_enrich()
    pipeline.run_match()
    pipeline.run_filter()
    pipeline.run_teams()
    pipeline.run_stats()
    result = pipeline.run_report()
    assert (Path(result["output_dir"]) / "team_composition.csv").exists()


def test_ingest_audits_unofficial_drop(pipeline):
    pipeline.run_ingest()
    rows = pipeline.store.sql("SELECT * FROM audit WHERE stage = 'ingest'")
    assert len(rows) == 1
    assert rows[0]["reason"] == "unofficial"


def test_stage_reruns_are_idempotent(pipeline):
    pipeline.run_ingest()
    first = pipeline.store.sql("SELECT COUNT(*) AS n FROM raw_pairs")[0]["n"]
    pipeline.run_ingest()
    second = pipeline.store.sql("SELECT COUNT(*) AS n FROM raw_pairs")[0]["n"]
    assert first == second == 25


def test_resume_from_existing_stage_dir(tmp_path):
    config = load_config(CORPUS_CONFIG)
    config.output_dir = str(tmp_path / "out")
    first = Pipeline(config, tmp_path / "stage")
    first.run_ingest()
    first.run_enrich()
    first.close()

    resumed = Pipeline(config, tmp_path / "stage")
    assert resumed.store.stage_completed("enrich")
    resumed.run_match()  # picks up where the first process stopped
    resumed.run_filter()
    resumed.run_teams()
    resumed.run_stats()
    resumed.run_report()
    resumed.close()
    assert (tmp_path / "out" / "filter_audit.csv").exists()


def test_resolver_reclassifies_pwc_articles(pipeline):
    pipeline.run_ingest()
    pipeline.run_enrich()
    resolved = pipeline.store.get_article("10.1093/gigascience/giz0404")
    assert resolved.article_type == "research article"
    preprint = pipeline.store.get_article("10.48550/arXiv.2007.01001")
    assert preprint.article_type == "preprint"


def test_report_on_empty_analysis_set(tmp_path):
    config = load_config(CORPUS_CONFIG)
    config.output_dir = str(tmp_path / "out")
    # an impossible citation floor empties the analysis set
    config.filters.min_citations = 10_000
    pipeline = Pipeline(config, tmp_path / "stage")
    result = pipeline.run_all()
    pipeline.close()
    assert result["filter"]["analysis_pairs"] == 0
    glm = (tmp_path / "out" / "citations_glm_overall.csv").read_text().splitlines()
    assert glm[0].startswith("variable,")
    assert "(not_fit" in glm[1]
    team = (tmp_path / "out" / "team_composition.csv").read_text().splitlines()
    assert len(team) >= 2  # headers plus empty group rows


def test_confidence_floor_override_changes_audit(tmp_path):
    config = load_config(CORPUS_CONFIG)
    config.output_dir = str(tmp_path / "out")
    config.filters.confidence_floor = 0.5
    pipeline = Pipeline(config, tmp_path / "stage")
    result = pipeline.run_all()
    pipeline.close()
    # nothing sits below 0.5 because edges are only stored at >= 0.5
    assert result["filter"]["audit"]["confidence"] == 0


def test_export_after_run_round_trips(tmp_path, pipeline):
    pipeline.run_ingest()
    pipeline.run_enrich()
    pipeline.run_match()
    from softcredit.graphstore import import_dataset

    exported = pipeline.store.export_dataset(tmp_path / "export")
    rebuilt = import_dataset(exported)
    again = rebuilt.export_dataset(tmp_path / "export2")
    for f in sorted(exported.iterdir()):
        assert (again / f.name).read_bytes() == f.read_bytes(), f.name


def test_filter_rules_commute_in_outcome(pipeline):
    """The survivor set equals the pairs passing every rule predicate,
    independent of application order."""
    from datetime import timedelta

    from softcredit.analysis import apply_analysis_filters
    from softcredit.languages import has_programming_language_files

    pipeline.run_ingest()
    pipeline.run_enrich()
    pipeline.run_match()
    pipeline.store.apply_one_to_one()
    config = pipeline.config.filters
    analysis = apply_analysis_filters(pipeline.store, config)

    order_free = set()
    for pair in pipeline.store.iter_pairs(include_excluded=False):
        article = pipeline.store.get_article(pair.doi)
        repo = pipeline.store.get_repo(pair.repo)
        predicates = [
            has_programming_language_files(repo.language_bytes),
            article.citation_count >= config.min_citations,
            repo.last_commit_at
            <= article.publication_date + timedelta(days=config.commit_window_days),
            config.min_authors <= len(article.authors) <= config.max_authors,
        ]
        if all(predicates):
            order_free.add(pair.pair_id)
    assert set(analysis.pair_ids) == order_free


def test_enrich_audits_every_exclusion(tmp_path):
    """A raw pair whose article or repository is missing from the
    backend is excluded exactly once with a machine-readable reason."""
    import shutil

    config = load_config(CORPUS_CONFIG)
    config.output_dir = str(tmp_path / "out")
    fixture_copy = tmp_path / "backend"
    shutil.copytree(config.fixture_dir, fixture_copy)
    config.fixture_dir = str(fixture_copy)
    # delete one article and one repo from the backend
    (fixture_copy / "articles" / "10.21105%2Fjoss.01001.json").unlink()
    (fixture_copy / "repos" / "quantlab__spin-mc.json").unlink()

    pipeline = Pipeline(config, tmp_path / "stage")
    pipeline.run_ingest()
    result = pipeline.run_enrich()
    assert result["excluded"] == 2
    rows = pipeline.store.sql(
        "SELECT reason, subject FROM audit WHERE stage = 'enrich' ORDER BY id"
    )
    reasons = sorted(r["reason"] for r in rows)
    assert reasons == ["article_not_found", "repo_gone"]
    assert len({r["subject"] for r in rows}) == 2
    pipeline.close()
