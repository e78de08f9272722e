"""ROUGE-N recall with clipped n-gram counts, plus sentence precision.

No stemming, no stopword removal, no length truncation. Scores are plain
integer ratios so results are reproducible exactly.
"""

from __future__ import annotations

import csv
import io
from collections import Counter
from dataclasses import dataclass

__all__ = [
    "NgramMultiset",
    "RougeScore",
    "format_table",
    "ngrams",
    "report_csv",
    "rouge_n",
    "rouge_n_multi",
    "sentence_precision",
    "write_report_csv",
]

REPORT_COLUMNS = ("doc_id", "rouge1_recall", "rouge2_recall", "precision")


@dataclass(frozen=True)
class NgramMultiset:
    counts: Counter
    n: int

    @property
    def total(self) -> int:
        return sum(self.counts.values())


@dataclass(frozen=True)
class RougeScore:
    recall: float
    overlap_count: int
    reference_count: int


def ngrams(tokens, n: int) -> NgramMultiset:
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    tokens = list(tokens)
    grams = Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))
    return NgramMultiset(grams, n)


def rouge_n(candidate, reference, n: int) -> RougeScore:
    cand = ngrams(candidate, n).counts
    ref = ngrams(reference, n)
    overlap = sum(min(c, cand[g]) for g, c in ref.counts.items())
    total = ref.total
    return RougeScore(overlap / total if total else 0.0, overlap, total)


def rouge_n_multi(candidate, references, n: int) -> RougeScore:
    """Score against each reference independently and keep the best recall."""
    scores = [rouge_n(candidate, ref, n) for ref in references]
    if not scores:
        return RougeScore(0.0, 0, 0)
    return max(scores, key=lambda s: s.recall)


def sentence_precision(selected_indices, reference_indices) -> float:
    """Fraction of selected sentences that belong to the reference extract.

    This is a reconstruction of a custom precision function; it is reported as
    "sentence-precision (reconstructed)".
    """
    selected = set(selected_indices)
    if not selected:
        return 0.0
    return len(selected & set(reference_indices)) / len(selected)


def _fmt(x: float) -> str:
    return f"{x:.6f}"


def report_csv(rows) -> str:
    """CSV text for rows of ``(doc_id, rouge1, rouge2, precision)``; LF line endings."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(REPORT_COLUMNS)
    for doc_id, r1, r2, prec in rows:
        writer.writerow([doc_id, _fmt(r1), _fmt(r2), _fmt(prec)])
    return buf.getvalue()


def write_report_csv(rows, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(report_csv(rows))


def format_table(rows, header=REPORT_COLUMNS) -> str:
    cells = [list(header)] + [
        [str(r[0])] + [_fmt(x) if isinstance(x, float) else str(x) for x in r[1:]]
        for r in rows
    ]
    widths = [max(len(row[i]) for row in cells) for i in range(len(header))]
    lines = []
    for j, row in enumerate(cells):
        parts = [row[0].ljust(widths[0])] + [c.rjust(w) for c, w in zip(row[1:], widths[1:])]
        lines.append("  ".join(parts).rstrip())
        if j == 0:
            lines.append("  ".join("-" * w for w in widths))
    return "\n".join(lines)
