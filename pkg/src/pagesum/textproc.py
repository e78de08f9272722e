"""Sentence segmentation and word tokenization.

Both functions are rule based and deterministic. The abbreviation list and
the punctuation strip-set are fixed so that the behaviour can be audited.
"""

from __future__ import annotations

import re
import string
from dataclasses import dataclass

__all__ = [
    "ABBREVIATIONS",
    "STRIP_SET",
    "Document",
    "Sentence",
    "split_sentences",
    "tokenize",
]

ABBREVIATIONS = frozenset(
    {"mr.", "mrs.", "dr.", "prof.", "st.", "u.s.", "e.g.", "i.e.", "etc."}
)

# ASCII punctuation minus hyphen and apostrophe. Hyphens and apostrophes are
# kept inside a token but trimmed from its ends.
STRIP_SET = frozenset(string.punctuation) - {"-", "'"}
_EDGE_CHARS = "-'"

_SPLIT_ON_STRIP = re.compile("[" + re.escape("".join(sorted(STRIP_SET))) + "]+")

# A run of terminators, optionally followed by closing quotes or brackets,
# that is followed by whitespace or the end of the text.
_BOUNDARY = re.compile(r"[.!?]+[\"')\]]*(?=\s|$)")
_OPENERS = "\"'([{"


@dataclass(frozen=True)
class Sentence:
    index: int
    raw: str
    tokens: tuple[str, ...]

    def __post_init__(self):
        if not self.raw.strip():
            raise ValueError("sentence text must be non-empty")


@dataclass(frozen=True)
class Document:
    """An ordered sequence of sentences.

    Documents built by :func:`split_sentences` are indexed ``0..n-1``.
    Intermediate documents produced during recursive summarization keep the
    indices of the sentences in the original source instead.
    """

    sentences: tuple[Sentence, ...] = ()
    source_id: str = ""

    def __len__(self) -> int:
        return len(self.sentences)

    def __iter__(self):
        return iter(self.sentences)

    def __getitem__(self, i):
        return self.sentences[i]

    @property
    def text(self) -> str:
        return " ".join(s.raw for s in self.sentences)

    @classmethod
    def from_sentences(cls, raws, source_id: str = "") -> "Document":
        """Build a document from already segmented sentence strings."""
        sents = []
        for raw in raws:
            raw = raw.strip()
            if raw:
                sents.append(Sentence(len(sents), raw, tuple(tokenize(raw))))
        return cls(tuple(sents), source_id)


def tokenize(raw_sentence: str) -> list[str]:
    """Lowercase word tokens with edge punctuation removed.

    >>> tokenize("The Cat, sat.")
    ['the', 'cat', 'sat']
    >>> tokenize("state-of-the-art 2002")
    ['state-of-the-art', '2002']
    """
    tokens = []
    for chunk in raw_sentence.lower().split():
        # punctuation inside a chunk ("a,b", "u.s") separates words
        for piece in _SPLIT_ON_STRIP.split(chunk):
            piece = piece.strip(_EDGE_CHARS)
            if piece:
                tokens.append(piece)
    return tokens


def _is_abbreviation(text: str, end: int) -> bool:
    start = end
    while start > 0 and not text[start - 1].isspace():
        start -= 1
    word = text[start:end].lstrip(_OPENERS).lower()
    return word in ABBREVIATIONS


def split_sentences(raw_text: str, source_id: str = "") -> Document:
    """Segment ``raw_text`` into a :class:`Document`.

    A sentence ends at ``.``, ``!`` or ``?`` followed by whitespace or the end
    of the text, unless the word carrying the period is a known abbreviation.

    >>> [s.raw for s in split_sentences("Mr. Smith left. He ran!")]
    ['Mr. Smith left.', 'He ran!']
    """
    raws = []
    start = 0
    for m in _BOUNDARY.finditer(raw_text):
        if m.group() == "." and _is_abbreviation(raw_text, m.end()):
            continue
        raws.append(raw_text[start : m.end()])
        start = m.end()
    raws.append(raw_text[start:])
    return Document.from_sentences(raws, source_id)
