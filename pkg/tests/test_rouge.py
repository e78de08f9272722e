from collections import Counter

import pytest
from hypothesis import given, settings, strategies as st

from pagesum.rouge import (
    format_table,
    ngrams,
    report_csv,
    rouge_n,
    rouge_n_multi,
    sentence_precision,
    write_report_csv,
)


def greedy_overlap(cand, ref, n):
    """Independent oracle: match each reference n-gram to an unused candidate n-gram."""
    c = [tuple(cand[i : i + n]) for i in range(len(cand) - n + 1)]
    used = [False] * len(c)
    hits = 0
    for g in (tuple(ref[i : i + n]) for i in range(len(ref) - n + 1)):
        for j, h in enumerate(c):
            if not used[j] and h == g:
                used[j] = True
                hits += 1
                break
    return hits


def test_ngrams_examples():
    assert ngrams(["a", "b", "a"], 1).counts == Counter({("a",): 2, ("b",): 1})
    assert ngrams(["a", "b", "a"], 2).counts == Counter({("a", "b"): 1, ("b", "a"): 1})
    assert ngrams(["a"], 2).total == 0


def test_rouge_examples():
    c, r = ["the", "cat", "sat"], ["the", "cat", "slept"]
    s1 = rouge_n(c, r, 1)
    assert (s1.overlap_count, s1.reference_count) == (2, 3) and s1.recall == pytest.approx(2 / 3)
    s2 = rouge_n(c, r, 2)
    assert (s2.overlap_count, s2.reference_count, s2.recall) == (1, 2, 0.5)
    assert rouge_n(r, r, 2).recall == 1.0
    assert rouge_n(["x"], ["y"], 1).recall == 0.0
    assert rouge_n(["x"], [], 1).recall == 0.0


def test_multi_reference_takes_max():
    assert rouge_n_multi(["a", "b"], [["c"], ["a", "z"]], 1).recall == 0.5


@settings(max_examples=300)
@given(
    st.lists(st.integers(0, 9), max_size=50),
    st.lists(st.integers(0, 9), max_size=50),
    st.sampled_from([1, 2]),
)
def test_overlap_matches_oracle(cand, ref, n):
    cand, ref = [str(t) for t in cand], [str(t) for t in ref]
    assert rouge_n(cand, ref, n).overlap_count == greedy_overlap(cand, ref, n)


@pytest.mark.parametrize(
    "sel, ref, expected",
    [([1, 2], [1, 2], 1.0), ([0, 1, 2, 3], [1, 2], 0.5), ([5], [], 0.0), ([], [1], 0.0)],
)
def test_sentence_precision(sel, ref, expected):
    assert sentence_precision(sel, ref) == expected


def test_report_csv(tmp_path):
    rows = [("d1", 1.0, 0.5, 0.25), ("MEAN", 1.0, 0.5, 0.25)]
    text = report_csv(rows)
    assert text.splitlines()[0] == "doc_id,rouge1_recall,rouge2_recall,precision"
    assert "d1,1.000000,0.500000,0.250000\n" in text and "\r" not in text
    path = tmp_path / "r.csv"
    write_report_csv(rows, path)
    assert path.read_bytes() == text.encode()


def test_format_table_aligned():
    lines = format_table([("a", 1.0, 0.5, 0.25), ("longer_id", 0.0, 0.0, 0.0)]).splitlines()
    assert len({len(l) for l in lines}) == 1
