"""Annotation service: sessions, labels, durability, agreement."""

from datetime import date

import pytest
from fastapi.testclient import TestClient

from softcredit.annosvc import AnnotationService, create_app
from softcredit.errors import InsufficientOverlap, SessionClosed
from softcredit.graphstore import GraphStore
from softcredit.records import (
    ArticleRecord,
    AuthorSlot,
    ContributorStat,
    RepoRecord,
    RepoRef,
    SourceKind,
)


def build_store(path=":memory:", n_candidates=5) -> GraphStore:
    store = GraphStore(path)
    authors = [
        AuthorSlot(author_id=f"A{i}", display_name=f"Author {i}",
                   position="first" if i == 0 else ("last" if i == n_candidates - 1 else "middle"),
                   h_index=5, works_count=20)
        for i in range(n_candidates)
    ]
    store.upsert_article(
        ArticleRecord(
            doi="10.1234/anno",
            title="Annotated article",
            article_type="research article",
            domain="Life Sciences",
            is_open_access=True,
            publication_date=date(2021, 1, 1),
            citation_count=3,
            authors=authors,
        )
    )
    store.upsert_repo(
        RepoRecord(
            repo=RepoRef("lab", "anno"),
            created_at=date(2020, 1, 1),
            last_commit_at=date(2021, 2, 1),
            language_bytes={"Python": 100},
            contributors=[
                ContributorStat(dev_id="D1", username="dev-one",
                                display_name="Dev One", email="dev@one.org", commits=3)
            ],
        )
    )
    pair_id = store.upsert_pair("10.1234/anno", RepoRef("lab", "anno"), SourceKind.PLOS)
    for i in range(n_candidates):
        store.upsert_candidate(pair_id, f"A{i}", "D1", similarity=1.0 - i * 0.1)
    return store


def test_queue_orders_by_similarity_desc():
    service = AnnotationService(build_store())
    session = service.open_session("ann1")
    assert session["queue_size"] == 5
    first = service.next_pair(session["session_id"])
    assert first["candidate"]["similarity"] == pytest.approx(1.0)


def test_next_pair_advances_only_on_submission():
    service = AnnotationService(build_store())
    session = service.open_session("ann1")["session_id"]
    a = service.next_pair(session)
    b = service.next_pair(session)
    assert a["candidate"]["candidate_id"] == b["candidate"]["candidate_id"]
    service.submit_label(a["candidate"]["candidate_id"], "ann1", "match")
    c = service.next_pair(session)
    assert c["candidate"]["candidate_id"] != a["candidate"]["candidate_id"]


def test_done_marker_at_queue_end():
    service = AnnotationService(build_store(n_candidates=1))
    session = service.open_session("ann1")["session_id"]
    view = service.next_pair(session)
    service.submit_label(view["candidate"]["candidate_id"], "ann1", "non_match")
    assert service.next_pair(session) == {"done": True, "labeled": 1, "remaining": 0}


def test_unknown_session_closed():
    service = AnnotationService(build_store())
    with pytest.raises(SessionClosed):
        service.next_pair("nope")


def test_duplicate_identical_submission_is_idempotent():
    store = build_store()
    service = AnnotationService(store)
    session = service.open_session("ann1")["session_id"]
    cid = service.next_pair(session)["candidate"]["candidate_id"]
    service.submit_label(cid, "ann1", "match")
    service.submit_label(cid, "ann1", "match")
    rows = store.sql(
        "SELECT * FROM annotation_labels WHERE candidate_id = ? AND annotator_id = 'ann1'",
        (cid,),
    )
    assert len(rows) == 1


def test_resubmission_overwrites_with_history():
    store = build_store()
    service = AnnotationService(store)
    session = service.open_session("ann1")["session_id"]
    cid = service.next_pair(session)["candidate"]["candidate_id"]
    service.submit_label(cid, "ann1", "match")
    service.submit_label(cid, "ann1", "non_match")
    rows = store.sql(
        "SELECT label, superseded FROM annotation_labels"
        " WHERE candidate_id = ? ORDER BY id",
        (cid,),
    )
    assert [(r["label"], r["superseded"]) for r in rows] == [("match", 1), ("non_match", 0)]


def test_labels_survive_restart(tmp_path):
    db = tmp_path / "store.db"
    store = build_store(db)
    service = AnnotationService(store)
    session = service.open_session("ann1")["session_id"]
    cid = service.next_pair(session)["candidate"]["candidate_id"]
    service.submit_label(cid, "ann1", "match")
    store.close()

    reopened = GraphStore(db)
    rows = reopened.sql("SELECT label FROM annotation_labels WHERE superseded = 0")
    assert [r["label"] for r in rows] == ["match"]


def test_queue_excludes_already_labeled():
    store = build_store()
    service = AnnotationService(store)
    session = service.open_session("ann1")["session_id"]
    cid = service.next_pair(session)["candidate"]["candidate_id"]
    service.submit_label(cid, "ann1", "match")
    fresh = service.open_session("ann1")
    assert fresh["queue_size"] == 4


def _label_all(service, annotator, labels):
    session = service.open_session(annotator)["session_id"]
    for label in labels:
        view = service.next_pair(session)
        service.submit_label(view["candidate"]["candidate_id"], annotator, label)


def test_agreement_identical_annotators():
    service = AnnotationService(build_store())
    _label_all(service, "ann1", ["match"] * 5)
    _label_all(service, "ann2", ["match"] * 5)
    report = service.agreement_report()
    assert report["kappa"] == 1.0
    assert report["disagreements"] == []


def test_agreement_half_kappa_case():
    service = AnnotationService(build_store(n_candidates=4))
    _label_all(service, "ann1", ["match", "match", "match", "non_match"])
    _label_all(service, "ann2", ["match", "match", "non_match", "non_match"])
    report = service.agreement_report()
    assert report["kappa"] == pytest.approx(0.5)
    assert len(report["disagreements"]) == 1


def test_agreement_excludes_unclear():
    service = AnnotationService(build_store(n_candidates=4))
    _label_all(service, "ann1", ["match", "unclear", "match", "non_match"])
    _label_all(service, "ann2", ["match", "match", "match", "non_match"])
    report = service.agreement_report()
    assert report["n_overlap"] == 3
    assert report["kappa"] == 1.0


def test_agreement_needs_two_annotators():
    service = AnnotationService(build_store())
    _label_all(service, "ann1", ["match"] * 5)
    with pytest.raises(InsufficientOverlap):
        service.agreement_report()


# --- HTTP surface ------------------------------------------------------------


@pytest.fixture
def client():
    return TestClient(create_app(build_store()))


def test_http_session_flow(client):
    session = client.post("/api/sessions", json={"annotator_id": "ann1"}).json()
    assert session["queue_size"] == 5
    view = client.get(f"/api/session/{session['session_id']}/next").json()
    assert not view["done"]
    assert view["candidate"]["developer"]["username"] == "dev-one"
    ack = client.post(
        "/api/labels",
        json={
            "candidate_id": view["candidate"]["candidate_id"],
            "annotator_id": "ann1",
            "label": "match",
        },
    )
    assert ack.status_code == 200
    progress = client.get("/api/progress").json()
    assert progress["total_labels"] == 1
    assert progress["sessions"][0]["labeled"] == 1


def test_http_invalid_label_is_422(client):
    session = client.post("/api/sessions", json={"annotator_id": "ann1"}).json()
    view = client.get(f"/api/session/{session['session_id']}/next").json()
    resp = client.post(
        "/api/labels",
        json={
            "candidate_id": view["candidate"]["candidate_id"],
            "annotator_id": "ann1",
            "label": "maybe",
        },
    )
    assert resp.status_code == 422


def test_http_unknown_session_404(client):
    assert client.get("/api/session/missing/next").status_code == 404


def test_http_unknown_candidate_404(client):
    resp = client.post(
        "/api/labels",
        json={"candidate_id": 9999, "annotator_id": "ann1", "label": "match"},
    )
    assert resp.status_code == 404


def test_http_agreement_conflict_when_insufficient(client):
    assert client.get("/api/agreement").status_code == 409
