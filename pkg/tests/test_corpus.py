import numpy as np
import pytest

from pagesum import corpus
from pagesum.corpus import (
    CorpusError,
    MissingBodyTagError,
    SplitSpec,
    XMLSyntaxError,
    build_training_pairs,
    generate_corpus,
    load_corpus,
    make_labels,
    make_pair,
    parse_duc_xml,
    split_train_eval,
)
from pagesum.network import NetworkConfig
from pagesum.textproc import Document


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text, encoding="utf-8")
    return p


@pytest.mark.parametrize(
    "xml, expected",
    [
        ("<DOC><TEXT>A cat. A dog.</TEXT></DOC>", "A cat. A dog."),
        ("<TEXT>a &amp; b</TEXT>", "a & b"),
        ("<doc><text>\n  <P>One.</P>\n <P>Two.</P></text></doc>", "One. Two."),
        ("<DOC><TEXT>a</TEXT><HEAD>skip</HEAD><TEXT>b</TEXT></DOC>", "a b"),
    ],
)
def test_parse_duc_xml(tmp_path, xml, expected):
    assert parse_duc_xml(write(tmp_path, "d.xml", xml)) == expected


def test_missing_body_tag(tmp_path):
    with pytest.raises(MissingBodyTagError):
        parse_duc_xml(write(tmp_path, "d.xml", "<DOC><HEAD>x</HEAD></DOC>"))


def test_configurable_body_tag(tmp_path):
    path = write(tmp_path, "d.xml", "<DOC><BODY>Hi.</BODY></DOC>")
    assert parse_duc_xml(path, "body") == "Hi."


def test_unterminated_tag_offset(tmp_path):
    with pytest.raises(XMLSyntaxError) as info:
        parse_duc_xml(write(tmp_path, "d.xml", "<DOC><TEXT>a <b</TEXT>"))
    assert info.value.offset == 13


def test_labels_exact_match():
    doc = Document.from_sentences(["A b.", "C d.", "E f."])
    ref = Document.from_sentences(["E f.", "A b."])
    assert make_labels(doc, ref) == [True, False, True]
    assert make_labels(doc, Document.from_sentences([])) == [False] * 3


def test_labels_rouge_fallback():
    doc = Document.from_sentences(["the cat sat on the mat", "dogs bark loudly"])
    ref = Document.from_sentences(["the cat sat on a mat"])
    assert make_labels(doc, ref) == [True, False]


def test_labels_fallback_threshold():
    doc = Document.from_sentences(["one two three", "four"])
    ref = Document.from_sentences(["one nine eight seven"])
    assert make_labels(doc, ref) == [False, False]


def test_build_training_pairs(small_table):
    cfg = NetworkConfig(page_len=6, embed_dim=8, hidden_size=3)
    doc = Document.from_sentences([f"Sentence w{i}." for i in range(14)], "x")
    labels = [False] * 14
    labels[3] = True
    labels[7] = labels[10] = True
    pair = corpus.CorpusPair(doc, Document.from_sentences([]), tuple(labels))
    out = build_training_pairs(pair, cfg, small_table)
    assert len(out) == 2  # third page has no positives
    assert out[0][1].probs.tolist() == [0, 0, 0, 1.0, 0, 0]
    assert out[1][1].probs.tolist() == [0, 0.5, 0, 0, 0.5, 0]


@pytest.mark.parametrize("n, n_train", [(4, 3), (567, 425), (2, 1)])
def test_split_sizes(n, n_train):
    pairs = [make_pair(Document.from_sentences([f"s{i}."], str(i)), Document.from_sentences([])) for i in range(n)]
    train, ev = split_train_eval(pairs, SplitSpec(0.75, seed=3))
    assert (len(train), len(ev)) == (n_train, n - n_train)
    again = split_train_eval(pairs, SplitSpec(0.75, seed=3))
    assert [p.doc_id for p in train] == [p.doc_id for p in again[0]]


def test_generated_corpus(tmp_path):
    ids = generate_corpus(tmp_path / "a", 50, seed=4)
    assert len(ids) == 50
    assert len(list((tmp_path / "a" / "docs").glob("*.txt"))) == 50
    assert len(list((tmp_path / "a" / "summaries").glob("*.txt"))) == 50
    generate_corpus(tmp_path / "b", 50, seed=4)
    for sub in ("docs", "summaries"):
        for f in (tmp_path / "a" / sub).iterdir():
            assert f.read_bytes() == (tmp_path / "b" / sub / f.name).read_bytes()
    pairs = load_corpus(tmp_path / "a")
    for pair in pairs:
        assert 30 <= len(pair.document) <= 120
        assert len(pair.reference_indices) == 5
        marked = [i for i, s in enumerate(pair.document) if corpus.MARKER in s.tokens]
        assert marked == pair.reference_indices


def test_load_corpus_errors(tmp_path):
    with pytest.raises(CorpusError):
        load_corpus(tmp_path)
    (tmp_path / "docs").mkdir()
    write(tmp_path / "docs", "a.xml", "<DOC><TEXT>A b. C d.</TEXT></DOC>")
    assert load_corpus(tmp_path) == []  # no summary, skipped
    (tmp_path / "summaries").mkdir()
    write(tmp_path / "summaries", "a.txt", "C d.\n")
    (pair,) = load_corpus(tmp_path)
    assert pair.doc_id == "a" and pair.reference_indices == [1]
