"""Page-wise recursive extractive summarization.

The document is cut into pages of ``page_len`` sentences, every page is
scored by the network, the best sentences of each page are kept in their
original order, and the shortened document is summarized again until at
most ``summary_len`` sentences remain.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .embedding import EmbeddingTable, embed_sentences
from .network import ContractError, NetworkParams, Page, forward
from .textproc import Document

__all__ = [
    "Summary",
    "SummaryRequest",
    "pass_bound",
    "page_quotas",
    "paginate",
    "select_top_k",
    "summarize",
    "summarize_pass",
]


@dataclass(frozen=True)
class SummaryRequest:
    summary_len: int = 5
    page_len: int = 40

    def __post_init__(self):
        if not 1 <= self.summary_len <= self.page_len:
            raise ContractError(
                f"summary_len must be in [1, page_len={self.page_len}], "
                f"got {self.summary_len}"
            )


@dataclass(frozen=True)
class Summary:
    indices: tuple[int, ...]
    text: str
    passes: int
    sentences: tuple[str, ...] = ()


def paginate(doc: Document, page_len: int, table: EmbeddingTable) -> list[Page]:
    if page_len < 1:
        raise ContractError(f"page_len must be >= 1, got {page_len}")
    pages = []
    for start in range(0, len(doc), page_len):
        chunk = doc.sentences[start : start + page_len]
        rows = embed_sentences([s.tokens for s in chunk], table)
        pages.append(Page.from_rows(rows, page_len, [s.index for s in chunk]))
    return pages


def select_top_k(probs, mask, k: int) -> list[int]:
    """The ``k`` most probable real slots, ties to the earlier slot, in slot order.

    >>> select_top_k([0.1, 0.5, 0.2, 0.2], [True] * 4, 2)
    [1, 2]
    """
    if k < 1:
        raise ContractError(f"k must be >= 1, got {k}")
    probs = np.asarray(probs, dtype=np.float64)
    slots = np.flatnonzero(np.asarray(mask, dtype=bool))
    # lexsort: last key is primary, so rank by -prob then by slot
    ranked = slots[np.lexsort((slots, -probs[slots]))]
    return sorted(int(s) for s in ranked[:k])


def page_quotas(page_sizes, summary_len: int, page_len: int) -> list[int]:
    """How many sentences each page keeps in one pass.

    Every page keeps ``summary_len`` sentences. When ``summary_len`` is more
    than half of ``page_len`` the trailing partial page keeps only its
    proportional share ``floor(size * summary_len / page_len)``, which makes
    each pass shrink the document by at least a factor ``page_len /
    summary_len``. A single page always keeps ``summary_len``.
    """
    sizes = list(page_sizes)
    quotas = [min(summary_len, n) for n in sizes]
    if len(sizes) > 1 and 2 * summary_len > page_len and sizes[-1] < page_len:
        quotas[-1] = sizes[-1] * summary_len // page_len
    return quotas


def _scored_pages(doc, params, table, page_len):
    for page in paginate(doc, page_len, table):
        _, _, probs = forward(page, params)
        yield page, probs


def summarize_pass(
    doc: Document, request: SummaryRequest, params: NetworkParams, table: EmbeddingTable
) -> Document:
    """One reduction pass. Kept sentences retain their source indices."""
    if len(doc) <= request.summary_len:
        return doc
    if params.config.page_len != request.page_len:
        raise ContractError("request page_len does not match the network")
    X, P = request.summary_len, request.page_len
    scored = list(_scored_pages(doc, params, table, P))
    pos_of = {s.index: i for i, s in enumerate(doc.sentences)}

    if X == P:
        # every page would keep all of its sentences; rank across pages instead
        cand = [
            (-probs[slot], pos_of[page.sentence_refs[slot]])
            for page, probs in scored
            for slot in range(page.n_real)
        ]
        keep = sorted(pos for _, pos in sorted(cand)[:X])
    else:
        quotas = page_quotas([p.n_real for p, _ in scored], X, P)
        keep = []
        for (page, probs), k in zip(scored, quotas):
            if k == 0:
                continue
            keep.extend(pos_of[page.sentence_refs[s]] for s in select_top_k(probs, page.mask, k))
    return Document(tuple(doc.sentences[i] for i in keep), doc.source_id)


def summarize(
    doc: Document, request: SummaryRequest, params: NetworkParams, table: EmbeddingTable
) -> Summary:
    """Recursively apply :func:`summarize_pass` until ``summary_len`` sentences remain."""
    passes = 0
    work = doc
    while len(work) > request.summary_len:
        shorter = summarize_pass(work, request, params, table)
        if len(shorter) >= len(work):  # pragma: no cover - guarded by page_quotas
            raise RuntimeError("summarization pass did not shrink the document")
        work = shorter
        passes += 1
    raws = tuple(s.raw for s in work.sentences)
    return Summary(
        indices=tuple(s.index for s in work.sentences),
        text=" ".join(raws),
        passes=passes,
        sentences=raws,
    )


def pass_bound(doc_len: int, summary_len: int, page_len: int) -> int | None:
    """``ceil(log_{page_len/summary_len}(doc_len/summary_len)) + 1``; ``None`` if undefined."""
    if page_len <= summary_len or doc_len <= summary_len:
        return None
    return math.ceil(math.log(doc_len / summary_len) / math.log(page_len / summary_len)) + 1
