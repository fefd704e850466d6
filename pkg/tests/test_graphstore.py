"""Store invariants: one-to-one dedup, upsert idempotence, round-trip."""

from datetime import date

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from softcredit.errors import ConstraintViolation, SchemaVersionMismatch
from softcredit.graphstore import GraphStore, dedupe_one_to_one, import_dataset
from softcredit.records import (
    ArticleRecord,
    AuthorSlot,
    ContributorStat,
    PairRecord,
    RepoRecord,
    RepoRef,
    SourceKind,
)


def _pair(pid, doi, owner, name, source=SourceKind.JOSS):
    return PairRecord(pair_id=pid, doi=doi, repo=RepoRef(owner, name), source=source)


# --- dedupe ------------------------------------------------------------------


def test_dedupe_shared_doi_removes_both():
    pairs = {_pair(1, "10.1/a1", "o", "r1"), _pair(2, "10.1/a1", "o", "r2")}
    assert dedupe_one_to_one(pairs) == set()


def test_dedupe_keeps_clean_pairs():
    pairs = {_pair(1, "10.1/a1", "o", "r1"), _pair(2, "10.1/a2", "o", "r2")}
    assert dedupe_one_to_one(pairs) == pairs


def test_dedupe_shared_repo_total_removal():
    pairs = {
        _pair(1, "10.1/a1", "o", "r1"),
        _pair(2, "10.1/a2", "o", "r1"),
        _pair(3, "10.1/a3", "o", "r3"),
    }
    assert dedupe_one_to_one(pairs) == {_pair(3, "10.1/a3", "o", "r3")}


def test_dedupe_repo_comparison_case_insensitive():
    pairs = {_pair(1, "10.1/a1", "Lab", "Tool"), _pair(2, "10.1/a2", "lab", "tool")}
    assert dedupe_one_to_one(pairs) == set()


@settings(max_examples=50)
@given(
    st.lists(
        st.tuples(st.integers(0, 8), st.integers(0, 8)),
        min_size=0,
        max_size=20,
        unique=True,
    )
)
def test_dedupe_survivors_have_degree_one(edges):
    pairs = [
        _pair(i, f"10.1/a{a}", "own", f"r{r}") for i, (a, r) in enumerate(edges)
    ]
    kept = dedupe_one_to_one(pairs)
    dois = [p.doi for p in kept]
    repos = [p.repo.key() for p in kept]
    assert len(dois) == len(set(dois))
    assert len(repos) == len(set(repos))


# --- upserts -------------------------------------------------------------------


def _article(doi="10.1234/x", n_authors=2, citations=5):
    authors = []
    for i in range(n_authors):
        position = "first" if i == 0 else ("last" if i == n_authors - 1 else "middle")
        authors.append(
            AuthorSlot(
                author_id=f"A{i}",
                display_name=f"Author {i}",
                position=position,
                h_index=3 + i,
                works_count=10,
            )
        )
    return ArticleRecord(
        doi=doi,
        title="An article",
        article_type="research article",
        domain="Life Sciences",
        is_open_access=True,
        publication_date=date(2021, 5, 1),
        citation_count=citations,
        authors=authors,
    )


def _repo(owner="lab", name="tool"):
    return RepoRecord(
        repo=RepoRef(owner, name),
        created_at=date(2020, 1, 1),
        last_commit_at=date(2021, 6, 1),
        language_bytes={"Python": 1000},
        contributors=[
            ContributorStat(dev_id="D1", username="dev1", commits=4, additions=100, deletions=10)
        ],
    )


def test_upsert_article_idempotent():
    store = GraphStore()
    first = store.upsert_article(_article())
    second = store.upsert_article(_article())
    assert first == second
    assert len(store.sql("SELECT * FROM articles")) == 1
    assert len(store.sql("SELECT * FROM article_authors")) == 2


def test_upsert_pair_requires_known_doi():
    store = GraphStore()
    store.upsert_repo(_repo())
    with pytest.raises(ConstraintViolation):
        store.upsert_pair("10.1234/missing", RepoRef("lab", "tool"), SourceKind.JOSS)


def test_upsert_edge_rejects_out_of_range_confidence():
    store = GraphStore()
    store.upsert_article(_article())
    store.upsert_repo(_repo())
    pair_id = store.upsert_pair("10.1234/x", RepoRef("lab", "tool"), SourceKind.JOSS)
    with pytest.raises(ConstraintViolation):
        store.upsert_edge(pair_id, "A0", "D1", 1.2)


def test_upsert_edge_idempotent_on_natural_key():
    store = GraphStore()
    store.upsert_article(_article())
    store.upsert_repo(_repo())
    pair_id = store.upsert_pair("10.1234/x", RepoRef("lab", "tool"), SourceKind.JOSS)
    e1 = store.upsert_edge(pair_id, "A0", "D1", 0.99)
    e2 = store.upsert_edge(pair_id, "A0", "D1", 0.98)
    assert e1 == e2
    assert store.edges_for_pair(pair_id) == [("A0", "D1", 0.98)]


def test_repo_round_trip_preserves_negative_duration_flag():
    store = GraphStore()
    rec = RepoRecord(
        repo=RepoRef("lab", "old"),
        created_at=date(2022, 1, 1),
        last_commit_at=date(2020, 1, 1),
        language_bytes={"R": 10},
    )
    assert rec.has_negative_duration
    store.upsert_repo(rec)
    loaded = store.get_repo(RepoRef("lab", "old"))
    assert loaded.has_negative_duration
    assert loaded.commit_duration_days == rec.commit_duration_days


def test_apply_one_to_one_marks_conflicts():
    store = GraphStore()
    store.upsert_article(_article("10.1234/a"))
    store.upsert_article(_article("10.1234/b"))
    store.upsert_repo(_repo("lab", "shared"))
    store.upsert_repo(_repo("lab", "solo"))
    store.upsert_pair("10.1234/a", RepoRef("lab", "shared"), SourceKind.JOSS)
    store.upsert_pair("10.1234/b", RepoRef("lab", "shared"), SourceKind.PLOS)
    store.upsert_pair("10.1234/a", RepoRef("lab", "solo"), SourceKind.JOSS)
    removed = store.apply_one_to_one()
    # both shared-repo pairs go, and 10.1234/a appeared twice so its solo
    # pair is conflicted too
    assert removed == 3
    assert store.iter_pairs(include_excluded=False) == []
    audits = store.sql("SELECT * FROM audit WHERE reason = 'one_to_one_conflict'")
    assert len(audits) == 3


# --- export / import -------------------------------------------------------------


def _populated_store() -> GraphStore:
    store = GraphStore()
    store.upsert_article(_article("10.1234/a"))
    store.upsert_article(_article("10.1234/b", n_authors=3))
    store.upsert_repo(_repo("lab", "t1"))
    store.upsert_repo(_repo("lab", "t2"))
    p1 = store.upsert_pair("10.1234/a", RepoRef("lab", "t1"), SourceKind.JOSS)
    p2 = store.upsert_pair("10.1234/b", RepoRef("lab", "t2"), SourceKind.PWC)
    store.upsert_edge(p1, "A0", "D1", 0.99)
    store.upsert_candidate(p1, "A0", "D1", 0.91)
    store.upsert_candidate(p2, "A1", "D1", 0.4)
    store.add_audit("ingest", "unofficial", "10.1234/c")
    return store


def test_export_is_deterministic(tmp_path):
    store = _populated_store()
    d1 = tmp_path / "one"
    d2 = tmp_path / "two"
    store.export_dataset(d1)
    store.export_dataset(d2)
    for f in sorted(d1.iterdir()):
        assert (d2 / f.name).read_bytes() == f.read_bytes()


def test_round_trip_import(tmp_path):
    store = _populated_store()
    exported = store.export_dataset(tmp_path / "out")
    rebuilt = import_dataset(exported)
    again = rebuilt.export_dataset(tmp_path / "again")
    for f in sorted(exported.iterdir()):
        assert (again / f.name).read_bytes() == f.read_bytes(), f.name


def test_empty_store_round_trip(tmp_path):
    store = GraphStore()
    exported = store.export_dataset(tmp_path / "empty")
    rebuilt = import_dataset(exported)
    assert rebuilt.iter_pairs() == []


def test_import_rejects_wrong_schema_version(tmp_path):
    store = _populated_store()
    exported = store.export_dataset(tmp_path / "out")
    manifest = exported / "manifest.json"
    manifest.write_text(manifest.read_text().replace('"schema_version": 1', '"schema_version": 99'))
    with pytest.raises(SchemaVersionMismatch):
        import_dataset(exported)


def test_import_rejects_tampered_edge(tmp_path):
    store = _populated_store()
    exported = store.export_dataset(tmp_path / "out")
    edges = exported / "match_edges.jsonl"
    edges.write_text(edges.read_text().replace('"A0"', '"GHOST"'))
    with pytest.raises(ConstraintViolation):
        import_dataset(exported)


def test_stage_records():
    store = GraphStore()
    assert not store.stage_completed("ingest")
    store.record_stage("ingest", "25 pairs")
    assert store.stage_completed("ingest")
