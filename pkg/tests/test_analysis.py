"""Filters, team classification, shares, h-index, coding frequency."""

import random
from datetime import date

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from softcredit.analysis import (
    FilterConfig,
    TeamComposition,
    classify_contributors,
    coding_frequency,
    compute_h_index,
    contribution_shares,
    most_common_attribute,
    summarize_compositions,
)
from softcredit.errors import TooFewPublications, ZeroTotal
from softcredit.languages import has_programming_language_files, is_programming_language
from softcredit.records import ContributorStat


def _dev(dev_id, commits=1, additions=0, deletions=0):
    return ContributorStat(
        dev_id=dev_id, username=dev_id.lower(), commits=commits,
        additions=additions, deletions=deletions,
    )


# --- language taxonomy -------------------------------------------------------


def test_programming_language_classification():
    assert is_programming_language("Python")
    assert is_programming_language("Fortran")
    assert not is_programming_language("Markdown")
    assert not is_programming_language("CSV")
    assert not is_programming_language("Jupyter Notebook")
    assert not is_programming_language("TotallyUnknownLang")


def test_has_programming_language_files():
    assert has_programming_language_files({"Python": 10, "Markdown": 500})
    assert not has_programming_language_files({"Markdown": 500, "CSV": 9000})
    assert not has_programming_language_files({"Python": 0})
    assert not has_programming_language_files({})


# --- filter config ------------------------------------------------------------


def test_filter_config_defaults_match_analysis_rules():
    config = FilterConfig()
    assert config.min_citations == 1
    assert config.commit_window_days == 90
    assert (config.min_authors, config.max_authors) == (3, 11)
    assert config.confidence_floor == 0.97
    assert config.require_code_files


def test_filter_config_validation():
    with pytest.raises(ValueError):
        FilterConfig(min_authors=5, max_authors=3)
    with pytest.raises(ValueError):
        FilterConfig(confidence_floor=1.4)


# --- classify_contributors ------------------------------------------------------


def test_classify_simple_counting():
    team = classify_contributors(
        ["A1", "A2", "A3"],
        [_dev("D1"), _dev("D2")],
        [("A1", "D1", 0.99)],
    )
    assert (team.total_authors, team.cc_a, team.ncc_a, team.cc_na) == (3, 1, 2, 1)


def test_classify_no_contributors():
    team = classify_contributors(["A1", "A2"], [], [])
    assert (team.total_authors, team.cc_a, team.ncc_a, team.cc_na) == (2, 0, 2, 0)


def test_classify_low_confidence_edge_is_unmatched():
    team = classify_contributors(
        ["A1", "A2", "A3"],
        [_dev("D1")],
        [("A1", "D1", 0.5)],
        confidence_floor=0.97,
    )
    assert team.cc_a == 0
    assert team.cc_na == 1


def test_classify_zero_commit_account_not_ccna():
    team = classify_contributors(["A1"], [_dev("D1", commits=0)], [])
    assert team.cc_na == 0


def test_classify_conserves_authors_on_random_fixtures():
    rng = random.Random(8)
    for _ in range(1000):
        authors = [f"A{i}" for i in range(rng.randint(1, 12))]
        devs = [_dev(f"D{i}", commits=rng.randint(0, 5)) for i in range(rng.randint(0, 6))]
        edges = []
        for _ in range(rng.randint(0, 10)):
            if devs:
                edges.append(
                    (rng.choice(authors), rng.choice(devs).dev_id, rng.random())
                )
        team = classify_contributors(authors, devs, edges)
        assert team.cc_a + team.ncc_a == team.total_authors
        assert team.cc_na <= len(devs)


# --- contribution shares -----------------------------------------------------------


def test_shares_basic():
    share = contribution_shares(_dev("D1", commits=5), 20, 100, 50)
    assert share.commit_share == pytest.approx(0.25)


def test_shares_absolute_changes():
    share = contribution_shares(
        _dev("D1", commits=1, additions=10, deletions=5), 10, 60, 40
    )
    assert share.abs_share == pytest.approx(0.15)


def test_shares_zero_total_raises():
    with pytest.raises(ZeroTotal):
        contribution_shares(_dev("D1"), 0, 10, 10)


def test_shares_sum_to_one_when_exhaustive():
    devs = [
        _dev("D1", commits=3, additions=30, deletions=5),
        _dev("D2", commits=7, additions=70, deletions=15),
    ]
    totals = (10, 100, 20)
    shares = [contribution_shares(d, *totals) for d in devs]
    assert sum(s.commit_share for s in shares) == pytest.approx(1.0)
    assert sum(s.addition_share for s in shares) == pytest.approx(1.0)
    assert sum(s.abs_share for s in shares) == pytest.approx(1.0)


# --- h-index ------------------------------------------------------------------------


def brute_force_h(citations):
    best = 0
    for h in range(len(citations) + 1):
        if sum(1 for c in citations if c >= h) >= h:
            best = h
    return best


def test_h_index_examples():
    assert compute_h_index([]) == 0
    assert compute_h_index([10, 10, 10]) == 3
    assert compute_h_index([5, 4, 3, 2, 1]) == 3


def test_h_index_brute_force_1000_random():
    rng = random.Random(31)
    for _ in range(1000):
        citations = [rng.randint(0, 40) for _ in range(rng.randint(0, 25))]
        assert compute_h_index(citations) == brute_force_h(citations)


@settings(max_examples=100)
@given(st.lists(st.integers(0, 100), max_size=40))
def test_h_index_permutation_invariant(citations):
    rng = random.Random(7)
    shuffled = citations[:]
    rng.shuffle(shuffled)
    assert compute_h_index(citations) == compute_h_index(shuffled)


# --- coding frequency ------------------------------------------------------------------


def test_coding_frequency_categories():
    assert coding_frequency([False, False, False]).category == "none"
    assert coding_frequency([True, True, True]).category == "always"
    assert coding_frequency([True, False, False]).category == "any"


def test_coding_frequency_half_is_majority():
    freq = coding_frequency([True, True, False, False])
    assert freq.coded_fraction == 0.5
    assert freq.category == "majority"


def test_coding_frequency_just_below_half_is_any():
    freq = coding_frequency([True] * 4999 + [False] * 5001)
    assert freq.coded_fraction < 0.5
    assert freq.category == "any"


def test_coding_frequency_needs_three_pairs():
    with pytest.raises(TooFewPublications):
        coding_frequency([True, False])


def test_coding_frequency_boundaries_match_bands():
    assert coding_frequency([True] * 9 + [False]).category == "majority"
    assert coding_frequency([True, False, False, False]).category == "any"


# --- most common attribute ---------------------------------------------------------------


def test_most_common_plain_majority():
    values = [("first", date(2020, 1, 1)), ("first", date(2021, 1, 1)),
              ("middle", date(2022, 1, 1))]
    assert most_common_attribute(values) == "first"


def test_most_common_tie_goes_to_most_recent():
    values = [
        ("first", date(2018, 1, 1)),
        ("last", date(2020, 1, 1)),
        ("first", date(2019, 1, 1)),
        ("last", date(2021, 1, 1)),
    ]
    assert most_common_attribute(values) == "last"


def test_most_common_single_value():
    assert most_common_attribute([("middle", date(2020, 1, 1))]) == "middle"


# --- composition summaries ---------------------------------------------------------------


def test_summary_identical_compositions_zero_std():
    comps = [TeamComposition(4, 1, 3, 0)] * 5
    summary = summarize_compositions(comps)
    assert summary["total_authors"].mean == 4.0
    assert summary["total_authors"].std == 0.0


def test_summary_hand_arithmetic():
    comps = [TeamComposition(4, 1, 3, 0), TeamComposition(6, 1, 5, 1)]
    summary = summarize_compositions(comps)
    assert summary["total_authors"].mean == pytest.approx(5.0)
    assert summary["total_authors"].std == pytest.approx(2 ** 0.5)


def test_summary_single_element_flagged():
    summary = summarize_compositions([TeamComposition(4, 2, 2, 1)])
    assert summary["cc_a"].mean == 2.0
    assert summary["cc_a"].std == 0.0
    assert summary["cc_a"].single_observation


def test_apply_filters_empty_store():
    from softcredit.analysis import FilterConfig, apply_analysis_filters
    from softcredit.graphstore import GraphStore

    result = apply_analysis_filters(GraphStore(), FilterConfig())
    assert result.pair_ids == []
    assert sum(result.audit.values()) == 0
