"""Input coercion shared by the estimators."""

from __future__ import annotations

from numbers import Integral

from .textproc import Document, split_sentences, tokenize


def check_document(doc, source_id: str = "") -> Document:
    """Accept a :class:`Document`, raw text, or a list of sentence strings."""
    if isinstance(doc, Document):
        return doc
    if isinstance(doc, str):
        return split_sentences(doc, source_id)
    if isinstance(doc, (list, tuple)) and all(isinstance(s, str) for s in doc):
        return Document.from_sentences(doc, source_id)
    raise TypeError(f"cannot interpret {type(doc).__name__} as a document")


def check_documents(X, name: str = "X") -> list[Document]:
    if isinstance(X, (str, Document)):
        raise TypeError(f"{name} must be a sequence of documents, not a single document")
    try:
        docs = list(X)
    except TypeError:
        raise TypeError(f"{name} must be a sequence of documents") from None
    return [check_document(d, str(i)) for i, d in enumerate(docs)]


def check_consistent_length(X, y) -> None:
    if len(X) != len(y):
        raise ValueError(f"found {len(X)} documents but {len(y)} reference summaries")


def check_tokens(sentence) -> list[str]:
    """Raw sentence text or an already tokenized sentence."""
    if isinstance(sentence, str):
        return tokenize(sentence)
    tokens = list(sentence)
    if not all(isinstance(t, str) for t in tokens):
        raise TypeError("token lists must contain strings")
    return tokens


def check_int(value, name: str, min_value: int = 1) -> int:
    if isinstance(value, bool) or not isinstance(value, Integral):
        raise TypeError(f"{name} must be an integer, got {value!r}")
    if value < min_value:
        raise ValueError(f"{name} must be >= {min_value}, got {value}")
    return int(value)
