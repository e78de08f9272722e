"""Document/summary pairs: loading, labelling, splitting and synthetic data.

Layout on disk::

    <root>/docs/<doc_id>.xml | <doc_id>.txt
    <root>/summaries/<doc_id>.txt
"""

from __future__ import annotations

import logging
import math
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .embedding import EmbeddingTable
from .network import ContractError, NetworkConfig, TargetDistribution
from .rouge import rouge_n
from .summarizer import paginate
from .textproc import Document, split_sentences

__all__ = [
    "CorpusError",
    "CorpusPair",
    "MissingBodyTagError",
    "SplitSpec",
    "XMLSyntaxError",
    "build_training_pairs",
    "generate_corpus",
    "load_corpus",
    "make_labels",
    "make_pair",
    "parse_duc_xml",
    "split_train_eval",
]

logger = logging.getLogger(__name__)

LABEL_RECALL_THRESHOLD = 0.5

_ENTITIES = {"amp": "&", "lt": "<", "gt": ">", "quot": '"', "apos": "'"}
_ENTITY_RE = re.compile(r"&(amp|lt|gt|quot|apos);")
_WS = re.compile(r"\s+")


class CorpusError(Exception):
    pass


class MissingBodyTagError(CorpusError):
    def __init__(self, path, tag):
        self.path = str(path)
        self.tag = tag
        super().__init__(f"{path}: no <{tag}> element found")


class XMLSyntaxError(CorpusError):
    def __init__(self, path, offset, reason):
        self.path = str(path)
        self.offset = offset
        super().__init__(f"{path}: byte {offset}: {reason}")


@dataclass(frozen=True)
class CorpusPair:
    document: Document
    reference_summary: Document
    labels: tuple[bool, ...]

    def __post_init__(self):
        if len(self.labels) != len(self.document):
            raise ContractError("labels must align with document sentences")

    @property
    def doc_id(self) -> str:
        return self.document.source_id

    @property
    def reference_indices(self) -> list[int]:
        return [i for i, flag in enumerate(self.labels) if flag]


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float = 0.75
    seed: int = 0

    def __post_init__(self):
        if not 0 < self.train_fraction < 1:
            raise ContractError(f"train_fraction must be in (0, 1), got {self.train_fraction}")


def _scan_tags(data: bytes, path):
    """Yield ``(start, end, name, closing)`` for every markup tag in ``data``."""
    pos = 0
    while True:
        lt = data.find(b"<", pos)
        if lt < 0:
            return
        gt = data.find(b">", lt + 1)
        nxt = data.find(b"<", lt + 1)
        if gt < 0 or (0 <= nxt < gt):
            raise XMLSyntaxError(path, lt, "unterminated tag")
        inner = data[lt + 1 : gt].strip()
        if not inner:
            raise XMLSyntaxError(path, lt, "empty tag")
        closing = inner.startswith(b"/")
        m = re.match(rb"/?\s*([^\s/>]+)", inner)
        name = m.group(1).decode("utf-8", "replace").upper() if m else ""
        yield lt, gt + 1, name, closing
        pos = gt + 1


def parse_duc_xml(path, body_tag: str = "TEXT") -> str:
    """Text content of every ``body_tag`` element, markup removed, whitespace collapsed."""
    path = Path(path)
    data = path.read_bytes()
    body_tag = body_tag.upper()
    depth = 0
    pieces = []
    found = False
    cursor = 0
    for start, end, name, closing in _scan_tags(data, path):
        if depth > 0:
            pieces.append(data[cursor:start])
            pieces.append(b" ")
        if name == body_tag and not data[start:end].rstrip(b">").endswith(b"/"):
            if closing:
                depth = max(depth - 1, 0)
            else:
                depth += 1
                found = True
        cursor = end
    if not found:
        raise MissingBodyTagError(path, body_tag)
    text = b"".join(pieces).decode("utf-8", "replace")
    text = _WS.sub(" ", text).strip()
    return _ENTITY_RE.sub(lambda m: _ENTITIES[m.group(1)], text)


def make_labels(document: Document, reference: Document) -> list[bool]:
    """Mark the document sentences that make up the reference extract.

    Exact token-list matches come first. Each reference sentence left
    unmatched then labels the document sentence with the highest ROUGE-1
    recall against it, if that recall is at least 0.5.
    """
    labels = [False] * len(document)
    doc_tokens = [list(s.tokens) for s in document]
    by_tokens: dict[tuple, list[int]] = {}
    for i, s in enumerate(document):
        by_tokens.setdefault(s.tokens, []).append(i)

    unmatched = []
    for ref in reference:
        hits = by_tokens.get(ref.tokens)
        if hits and ref.tokens:
            for i in hits:
                labels[i] = True
        else:
            unmatched.append(ref)

    for ref in unmatched:
        best, best_recall = -1, -1.0
        for i, toks in enumerate(doc_tokens):
            r = rouge_n(toks, ref.tokens, 1).recall
            if r > best_recall:
                best, best_recall = i, r
        if best >= 0 and best_recall >= LABEL_RECALL_THRESHOLD:
            labels[best] = True
    return labels


def make_pair(document: Document, reference: Document) -> CorpusPair:
    labels = make_labels(document, reference)
    if len(document) and len(reference) and not any(labels):
        logger.warning("%s: no sentence matched the reference summary", document.source_id)
    return CorpusPair(document, reference, tuple(labels))


def build_training_pairs(pair: CorpusPair, net_config: NetworkConfig, table: EmbeddingTable):
    """``(Page, TargetDistribution)`` per page that holds at least one positive."""
    out = []
    dropped = 0
    pages = paginate(pair.document, net_config.page_len, table)
    for p, page in enumerate(pages):
        base = p * net_config.page_len
        positives = [s for s in range(page.n_real) if pair.labels[base + s]]
        if not positives:
            dropped += 1
            continue
        out.append((page, TargetDistribution.uniform_over(positives, net_config.page_len)))
    if dropped:
        logger.debug("%s: dropped %d page(s) without positives", pair.doc_id, dropped)
    return out


def split_train_eval(pairs, spec: SplitSpec = SplitSpec()):
    """Seeded shuffle, then the first ``floor(train_fraction * n)`` pairs train."""
    pairs = list(pairs)
    n = len(pairs)
    if n == 0:
        raise ContractError("cannot split an empty corpus")
    n_train = math.floor(spec.train_fraction * n)
    n_train = min(max(n_train, 1), max(n - 1, 1))
    order = np.random.default_rng(spec.seed).permutation(n)
    return [pairs[i] for i in order[:n_train]], [pairs[i] for i in order[n_train:]]


def read_document(path, body_tag: str = "TEXT") -> Document:
    path = Path(path)
    if path.suffix.lower() == ".xml":
        text = parse_duc_xml(path, body_tag)
    else:
        text = path.read_text(encoding="utf-8")
    return split_sentences(text, source_id=path.stem)


def load_corpus(root, body_tag: str = "TEXT") -> list[CorpusPair]:
    """Pair ``docs/*`` with ``summaries/<stem>.txt``; documents without a summary are skipped."""
    root = Path(root)
    docs_dir, sums_dir = root / "docs", root / "summaries"
    if not docs_dir.is_dir():
        raise CorpusError(f"{docs_dir} is not a directory")
    pairs = []
    for path in sorted(docs_dir.iterdir()):
        if path.suffix.lower() not in (".xml", ".txt"):
            continue
        ref_path = sums_dir / f"{path.stem}.txt"
        if not ref_path.is_file():
            logger.warning("no summary for %s, skipping", path.name)
            continue
        doc = read_document(path, body_tag)
        ref = split_sentences(ref_path.read_text(encoding="utf-8"), source_id=path.stem)
        pairs.append(make_pair(doc, ref))
    return pairs


# Synthetic corpus -----------------------------------------------------------

MARKER = "q"
SENTENCE_WORDS = (2, 4)
_SYLLABLES = ("ka", "lo", "mi", "ne", "ru", "ta", "so", "pe")


def _pseudo_vocabulary(size: int = 100, seed: int = 2002) -> tuple[str, ...]:
    # Pseudo-words of 2-4 syllables sharing one suffix. The shared syllables
    # and suffix give filler words overlapping character n-grams, so filler
    # sentences sit close together in embedding space and the marker stands out.
    rng = np.random.default_rng(seed)
    words: set[str] = set()
    while len(words) < size:
        n = int(rng.integers(2, 5))
        words.add("".join(rng.choice(_SYLLABLES, size=n)) + "ing")
    return tuple(sorted(words))


VOCABULARY = _pseudo_vocabulary()


def _synthetic_sentence(rng, marked: bool) -> str:
    lo, hi = SENTENCE_WORDS
    words = list(rng.choice(VOCABULARY, size=int(rng.integers(lo, hi + 1))))
    if marked:
        words.insert(int(rng.integers(0, len(words) + 1)), MARKER)
    words[0] = words[0].capitalize()
    return " ".join(words) + "."


def generate_corpus(
    root,
    n_docs: int,
    seed: int = 0,
    summary_len: int = 5,
    min_sentences: int = 30,
    max_sentences: int = 120,
) -> list[str]:
    """Write ``n_docs`` synthetic documents whose summaries are their marked sentences.

    Each document has ``min_sentences..max_sentences`` sentences drawn from a
    fixed vocabulary. ``summary_len`` of them carry the marker token and are
    copied verbatim into the reference summary. Returns the document ids.
    """
    if n_docs < 1:
        raise ContractError("n_docs must be >= 1")
    root = Path(root)
    (root / "docs").mkdir(parents=True, exist_ok=True)
    (root / "summaries").mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    width = max(4, len(str(n_docs - 1)))
    ids = []
    for d in range(n_docs):
        doc_id = f"doc{d:0{width}d}"
        n = int(rng.integers(min_sentences, max_sentences + 1))
        marked = set(rng.choice(n, size=min(summary_len, n), replace=False).tolist())
        sents = [_synthetic_sentence(rng, i in marked) for i in range(n)]
        paragraphs = [" ".join(sents[i : i + 5]) for i in range(0, n, 5)]
        (root / "docs" / f"{doc_id}.txt").write_text("\n".join(paragraphs) + "\n", encoding="utf-8")
        summary = [sents[i] for i in sorted(marked)]
        (root / "summaries" / f"{doc_id}.txt").write_text("\n".join(summary) + "\n", encoding="utf-8")
        ids.append(doc_id)
    return ids
