"""Link extraction, URL normalization, and source loading."""

import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from softcredit.errors import MalformedRepoUrl, SchemaError
from softcredit.ingest import extract_repo_links, load_source_records, normalize_repo_url
from softcredit.records import RepoRef, SourceKind


def test_extract_single_url():
    assert extract_repo_links("Code at https://github.com/alice/tool.") == [
        RepoRef("alice", "tool")
    ]


def test_extract_filters_non_github_hosts():
    text = "https://github.com/a/b/tree/main and https://gitlab.com/x/y"
    assert extract_repo_links(text) == [RepoRef("a", "b")]


def test_extract_strips_git_suffix_and_punctuation():
    assert extract_repo_links("see github.com/Org/Pkg.git;") == [RepoRef("Org", "Pkg")]


def test_extract_handles_empty_text():
    assert extract_repo_links("") == []
    assert extract_repo_links("no links here") == []


def test_extract_collapses_duplicates_case_insensitively():
    text = "github.com/A/B then https://www.github.com/a/b/issues"
    refs = extract_repo_links(text)
    assert refs == [RepoRef("A", "B")]
    assert refs[0].owner == "A"  # first-seen casing is preserved


def test_extract_order_of_first_appearance():
    text = "github.com/z/z, github.com/a/a, github.com/z/z"
    assert [r.full_name for r in extract_repo_links(text)] == ["z/z", "a/a"]


def test_normalize_strips_www_and_trailing_slash():
    assert normalize_repo_url("https://www.github.com/a/b/") == RepoRef("a", "b")


def test_normalize_strips_git_and_query():
    assert normalize_repo_url("github.com/a/b.git?tab=readme") == RepoRef("a", "b")


def test_normalize_keeps_first_two_segments():
    assert normalize_repo_url("https://github.com/a/b/tree/main/src") == RepoRef("a", "b")


def test_normalize_rejects_single_segment():
    with pytest.raises(MalformedRepoUrl):
        normalize_repo_url("https://github.com/a")


def test_normalize_rejects_other_hosts():
    with pytest.raises(MalformedRepoUrl):
        normalize_repo_url("https://gitlab.com/a/b")


_owner = st.from_regex(r"[A-Za-z0-9][A-Za-z0-9-]{0,12}", fullmatch=True)
_name = st.from_regex(r"[A-Za-z0-9][A-Za-z0-9_.-]{0,20}", fullmatch=True)


@given(_owner, _name)
def test_extraction_idempotent_under_serialization(owner, name):
    try:
        ref = RepoRef(owner, name)
    except ValueError:
        return
    refs = extract_repo_links(f"https://github.com/{ref.owner}/{ref.name}")
    assert refs == [ref]
    assert normalize_repo_url(f"https://github.com/{ref.owner}/{ref.name}") == ref


@given(_owner, _name)
def test_extracted_refs_round_trip_through_normalize(owner, name):
    try:
        ref = RepoRef(owner, name)
    except ValueError:
        return
    for found in extract_repo_links(f"see github.com/{owner}/{name}."):
        assert normalize_repo_url(f"https://github.com/{found.owner}/{found.name}") == found


def _write_jsonl(path, rows):
    path.write_text("\n".join(json.dumps(r) for r in rows) + "\n", encoding="utf-8")


def test_load_joss_rows(tmp_path):
    path = tmp_path / "joss.jsonl"
    _write_jsonl(
        path,
        [{"doi": "10.21105/joss.01234", "source": "joss",
          "repository_url": "https://github.com/lab/tool"}],
    )
    pairs = load_source_records(path, SourceKind.JOSS)
    assert len(pairs) == 1
    assert pairs[0].relationship == "official"
    assert pairs[0].repo == RepoRef("lab", "tool")


def test_load_plos_fan_out(tmp_path):
    path = tmp_path / "plos.jsonl"
    _write_jsonl(
        path,
        [{"doi": "10.1371/journal.pone.0001", "source": "plos",
          "availability_text": "Code at github.com/a/one and github.com/b/two."}],
    )
    pairs = load_source_records(path, SourceKind.PLOS)
    assert [p.repo.full_name for p in pairs] == ["a/one", "b/two"]
    assert all(p.relationship == "mined" for p in pairs)


def test_load_pwc_drops_unofficial(tmp_path):
    path = tmp_path / "pwc.jsonl"
    _write_jsonl(
        path,
        [
            {"doi": "10.48550/arXiv.2101.00001", "source": "pwc",
             "repo_url": "https://github.com/x/official", "is_official": True},
            {"doi": "10.48550/arXiv.2101.00002", "source": "pwc",
             "repo_url": "https://github.com/x/unofficial", "is_official": False},
        ],
    )
    drops = []
    pairs = load_source_records(path, SourceKind.PWC, on_drop=lambda ln, r: drops.append((ln, r)))
    assert [p.repo.name for p in pairs] == ["official"]
    assert drops == [(2, "unofficial")]


def test_load_audits_every_drop(tmp_path):
    path = tmp_path / "plos.jsonl"
    rows = [
        {"doi": "10.1371/journal.pone.0001", "availability_text": "no links"},
        {"doi": "10.1371/journal.pone.0002", "availability_text": "github.com/a/b"},
        {"doi": "10.1371/journal.pone.0003",
         "availability_text": "https://gitlab.com/no/match only"},
    ]
    _write_jsonl(path, rows)
    drops = []
    pairs = load_source_records(path, SourceKind.PLOS, on_drop=lambda ln, r: drops.append(ln))
    assert len(pairs) == 1
    assert drops == [1, 3]


def test_load_raises_schema_error_with_line_number(tmp_path):
    path = tmp_path / "joss.jsonl"
    path.write_text('{"doi": "10.21105/x", "repository_url": "github.com/a/b"}\nnot json\n')
    with pytest.raises(SchemaError) as err:
        load_source_records(path, SourceKind.JOSS)
    assert err.value.line == 2


def test_load_rejects_malformed_doi(tmp_path):
    path = tmp_path / "joss.jsonl"
    _write_jsonl(path, [{"doi": "not-a-doi", "repository_url": "github.com/a/b"}])
    with pytest.raises(SchemaError) as err:
        load_source_records(path, SourceKind.JOSS)
    assert err.value.line == 1


def test_load_rejects_source_mismatch(tmp_path):
    path = tmp_path / "joss.jsonl"
    _write_jsonl(path, [{"doi": "10.21105/joss.1", "source": "plos",
                         "repository_url": "github.com/a/b"}])
    with pytest.raises(SchemaError):
        load_source_records(path, SourceKind.JOSS)


def test_trailing_dot_names_are_not_canonical():
    # prose extraction strips sentence punctuation, so a trailing-dot
    # name can never round-trip and is rejected at construction
    with pytest.raises(ValueError):
        RepoRef("owner", "name.")
    assert extract_repo_links("github.com/a/b.c.d.") == [RepoRef("a", "b.c.d")]
