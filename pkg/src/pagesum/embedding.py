"""Fixed-width sentence vectors from hashed character n-grams.

A token maps to the mean of the bucket vectors of its character n-grams,
unless a pretrained vector is available for it. A sentence maps to the
L2-normalized mean of its token vectors.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

__all__ = [
    "EmbeddingConfig",
    "EmbeddingTable",
    "HashedBuckets",
    "VectorFormatError",
    "char_ngrams",
    "embed_sentence",
    "embed_sentences",
    "fnv1a_64",
    "hash_ngram",
    "load_pretrained",
]

logger = logging.getLogger(__name__)

FNV_OFFSET = 0xCBF29CE484222325
FNV_PRIME = 0x100000001B3
_MASK64 = (1 << 64) - 1


class VectorFormatError(ValueError):
    """A line of a text vector file could not be parsed."""

    def __init__(self, path, lineno: int, reason: str):
        self.path = str(path)
        self.lineno = lineno
        super().__init__(f"{path}:{lineno}: {reason}")


@dataclass(frozen=True)
class EmbeddingConfig:
    dim: int = 100
    ngram_min: int = 3
    ngram_max: int = 6
    bucket_count: int = 2_000_000
    seed: int = 0

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError(f"dim must be >= 1, got {self.dim}")
        if not 1 <= self.ngram_min <= self.ngram_max:
            raise ValueError(
                f"need 1 <= ngram_min <= ngram_max, got {self.ngram_min}, {self.ngram_max}"
            )
        if self.bucket_count < 1:
            raise ValueError(f"bucket_count must be >= 1, got {self.bucket_count}")


def fnv1a_64(data: bytes) -> int:
    h = FNV_OFFSET
    for byte in data:
        h ^= byte
        h = (h * FNV_PRIME) & _MASK64
    return h


def hash_ngram(ngram: str, bucket_count: int) -> int:
    """FNV-1a 64-bit hash of the UTF-8 bytes of ``ngram``, modulo ``bucket_count``."""
    return fnv1a_64(ngram.encode("utf-8")) % bucket_count


def char_ngrams(token: str, nmin: int, nmax: int) -> list[str]:
    """Character n-grams of ``<token>``, shortest first, then the whole wrapped token.

    >>> char_ngrams("cat", 3, 3)
    ['<ca', 'cat', 'at>', '<cat>']
    """
    if not 1 <= nmin <= nmax:
        raise ValueError(f"need 1 <= nmin <= nmax, got {nmin}, {nmax}")
    wrapped = f"<{token}>"
    grams = []
    if token:
        # n == len(wrapped) would duplicate the trailing whole-token entry
        for n in range(nmin, min(nmax, len(wrapped) - 1) + 1):
            grams.extend(wrapped[i : i + n] for i in range(len(wrapped) - n + 1))
    grams.append(wrapped)
    return grams


class HashedBuckets:
    """Read-only ``bucket_count x dim`` matrix of n-gram bucket vectors.

    Rows are generated on first access from ``(seed, row)`` so that the
    default two million buckets never need to be materialized. Entries are
    uniform in ``[-1/dim, 1/dim]``.
    """

    def __init__(self, bucket_count: int, dim: int, seed: int):
        self.bucket_count = bucket_count
        self.dim = dim
        self.seed = seed
        self._rows: dict[int, np.ndarray] = {}

    @property
    def shape(self) -> tuple[int, int]:
        return (self.bucket_count, self.dim)

    def __len__(self) -> int:
        return self.bucket_count

    def __getitem__(self, row: int) -> np.ndarray:
        row = int(row)
        if not 0 <= row < self.bucket_count:
            raise IndexError(row)
        vec = self._rows.get(row)
        if vec is None:
            rng = np.random.default_rng([self.seed & _MASK64, row])
            bound = 1.0 / self.dim
            vec = rng.uniform(-bound, bound, self.dim)
            vec.setflags(write=False)
            self._rows[row] = vec
        return vec


@dataclass(eq=False)
class EmbeddingTable:
    """Word vectors plus hashed n-gram buckets for one :class:`EmbeddingConfig`."""

    config: EmbeddingConfig = field(default_factory=EmbeddingConfig)
    word_vectors: dict[str, np.ndarray] = field(default_factory=dict)
    bucket_vectors: HashedBuckets | None = None

    def __post_init__(self):
        cfg = self.config
        if self.bucket_vectors is None:
            self.bucket_vectors = HashedBuckets(cfg.bucket_count, cfg.dim, cfg.seed)
        elif self.bucket_vectors.shape != (cfg.bucket_count, cfg.dim):
            raise ValueError("bucket table shape does not match config")
        for word, vec in self.word_vectors.items():
            vec = np.asarray(vec, dtype=np.float64)
            if vec.shape != (cfg.dim,) or not np.all(np.isfinite(vec)):
                raise ValueError(f"bad vector for {word!r}")
            vec.setflags(write=False)
            self.word_vectors[word] = vec
        self._token_cache: dict[str, np.ndarray] = {}

    @property
    def dim(self) -> int:
        return self.config.dim

    def token_vector(self, token: str) -> np.ndarray:
        vec = self.word_vectors.get(token)
        if vec is not None:
            return vec
        vec = self._token_cache.get(token)
        if vec is None:
            cfg = self.config
            rows = [
                self.bucket_vectors[hash_ngram(g, cfg.bucket_count)]
                for g in char_ngrams(token, cfg.ngram_min, cfg.ngram_max)
            ]
            vec = np.mean(rows, axis=0)
            vec.setflags(write=False)
            self._token_cache[token] = vec
        return vec


def embed_sentence(tokens, table: EmbeddingTable) -> np.ndarray:
    """Unit-length mean of the token vectors; the zero vector for no tokens."""
    out = np.zeros(table.dim)
    if not tokens:
        return out
    for tok in tokens:
        out += table.token_vector(tok)
    out /= len(tokens)
    norm = np.linalg.norm(out)
    if norm > 0:
        out /= norm
    return out


def embed_sentences(token_lists, table: EmbeddingTable) -> np.ndarray:
    rows = [embed_sentence(toks, table) for toks in token_lists]
    if not rows:
        return np.zeros((0, table.dim))
    return np.vstack(rows)


def _parse_floats(fields, path, lineno):
    try:
        return np.array([float(x) for x in fields], dtype=np.float64)
    except ValueError:
        raise VectorFormatError(path, lineno, "non-numeric vector component") from None


def load_pretrained(path, config: EmbeddingConfig) -> EmbeddingTable:
    """Read a text vector file (``<token> <f1> ... <fdim>`` per line).

    An optional ``<count> <dim>`` header line is accepted. Rows whose arity
    does not match ``config.dim`` raise :class:`VectorFormatError`.
    """
    path = Path(path)
    with path.open("r", encoding="utf-8", newline=None) as fh:
        lines = fh.read().splitlines()

    vectors: dict[str, np.ndarray] = {}
    for lineno, line in enumerate(lines, start=1):
        fields = line.rstrip("\r").split(" ")
        fields = [f for f in fields if f]
        if not fields:
            continue
        if lineno == 1 and len(fields) == 2 and all(f.isdigit() for f in fields):
            if int(fields[1]) != config.dim:
                raise VectorFormatError(
                    path, lineno, f"header dim {fields[1]} != configured dim {config.dim}"
                )
            continue
        if len(fields) != config.dim + 1:
            raise VectorFormatError(
                path, lineno, f"expected {config.dim} components, got {len(fields) - 1}"
            )
        vec = _parse_floats(fields[1:], path, lineno)
        if not np.all(np.isfinite(vec)):
            raise VectorFormatError(path, lineno, "non-finite vector component")
        vectors[fields[0]] = vec
    logger.info("loaded %d word vectors from %s", len(vectors), path)
    return EmbeddingTable(config, vectors)
