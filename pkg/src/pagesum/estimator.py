"""scikit-learn compatible wrappers around the summarization pipeline."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from . import corpus, network, summarizer
from ._validation import (
    check_consistent_length,
    check_document,
    check_documents,
    check_int,
    check_tokens,
)
from .embedding import EmbeddingConfig, EmbeddingTable, embed_sentence, load_pretrained
from .rouge import rouge_n
from .textproc import tokenize

__all__ = ["PageSummarizer", "SentenceEmbedder"]


class SentenceEmbedder(TransformerMixin, BaseEstimator):
    """Map sentences to unit-length hashed character n-gram vectors.

    Parameters
    ----------
    dim : int, default=100
        Output dimensionality.
    ngram_min, ngram_max : int, default=3, 6
        Character n-gram lengths, boundary markers included.
    bucket_count : int, default=2_000_000
        Number of hashed n-gram buckets.
    seed : int, default=0
        Seed of the bucket vectors.
    pretrained_path : str or path, default=None
        Optional text vector file; its words bypass the n-gram buckets.

    Attributes
    ----------
    table_ : EmbeddingTable
    n_features_out_ : int
    """

    def __init__(
        self,
        dim=100,
        ngram_min=3,
        ngram_max=6,
        bucket_count=2_000_000,
        seed=0,
        pretrained_path=None,
    ):
        self.dim = dim
        self.ngram_min = ngram_min
        self.ngram_max = ngram_max
        self.bucket_count = bucket_count
        self.seed = seed
        self.pretrained_path = pretrained_path

    def _config(self) -> EmbeddingConfig:
        return EmbeddingConfig(
            dim=check_int(self.dim, "dim"),
            ngram_min=check_int(self.ngram_min, "ngram_min"),
            ngram_max=check_int(self.ngram_max, "ngram_max"),
            bucket_count=check_int(self.bucket_count, "bucket_count"),
            seed=check_int(self.seed, "seed", 0),
        )

    def fit(self, X=None, y=None):
        """Build the embedding table. ``X`` is ignored; the encoder is not trained."""
        cfg = self._config()
        if self.pretrained_path is not None:
            self.table_ = load_pretrained(self.pretrained_path, cfg)
        else:
            self.table_ = EmbeddingTable(cfg)
        self.n_features_out_ = cfg.dim
        return self

    def transform(self, X):
        """Embed each sentence of ``X`` (raw strings or token lists).

        Returns
        -------
        ndarray of shape (n_sentences, dim)
        """
        check_is_fitted(self, "table_")
        rows = [embed_sentence(check_tokens(s), self.table_) for s in X]
        if not rows:
            return np.zeros((0, self.n_features_out_))
        return np.vstack(rows)

    def get_feature_names_out(self, input_features=None):
        check_is_fitted(self, "n_features_out_")
        return np.array([f"dim{i}" for i in range(self.n_features_out_)], dtype=object)


class PageSummarizer(BaseEstimator):
    """Recursive page-wise extractive summarizer.

    ``fit`` takes documents and their extractive reference summaries, derives
    per-sentence labels, and trains the page scorer. ``predict`` returns one
    :class:`~pagesum.summarizer.Summary` per document.

    Parameters
    ----------
    page_len : int, default=40
        Sentence slots per page.
    summary_len : int, default=5
        Sentences per summary; must not exceed ``page_len``.
    hidden_size : int, default=500
    learning_rate : float, default=0.02
    epochs : int, default=20
    seed : int, default=0
        Seeds weight initialization and the visiting order.
    embedder : SentenceEmbedder, default=None
        Sentence encoder; a default :class:`SentenceEmbedder` when ``None``.

    Attributes
    ----------
    params_ : NetworkParams
    embedder_ : SentenceEmbedder
    loss_curve_ : list of float
        Mean training loss per epoch.
    n_training_pages_ : int
    """

    def __init__(
        self,
        page_len=40,
        summary_len=5,
        hidden_size=500,
        learning_rate=0.02,
        epochs=20,
        seed=0,
        embedder=None,
    ):
        self.page_len = page_len
        self.summary_len = summary_len
        self.hidden_size = hidden_size
        self.learning_rate = learning_rate
        self.epochs = epochs
        self.seed = seed
        self.embedder = embedder

    def _network_config(self, embed_dim: int) -> network.NetworkConfig:
        return network.NetworkConfig(
            page_len=check_int(self.page_len, "page_len"),
            embed_dim=embed_dim,
            hidden_size=check_int(self.hidden_size, "hidden_size"),
            learning_rate=float(self.learning_rate),
            epochs=check_int(self.epochs, "epochs"),
            seed=check_int(self.seed, "seed", 0),
        )

    def _request(self) -> summarizer.SummaryRequest:
        return summarizer.SummaryRequest(
            check_int(self.summary_len, "summary_len"), check_int(self.page_len, "page_len")
        )

    def _fit_embedder(self) -> SentenceEmbedder:
        emb = SentenceEmbedder() if self.embedder is None else self.embedder
        return emb if hasattr(emb, "table_") else emb.fit()

    def fit(self, X, y):
        """Train on documents ``X`` and reference summaries ``y``."""
        docs = check_documents(X)
        refs = check_documents(y, "y")
        check_consistent_length(docs, refs)
        self._request()
        return self.fit_pairs([corpus.make_pair(d, r) for d, r in zip(docs, refs)])

    def fit_pairs(self, pairs):
        """Train on already labelled :class:`~pagesum.corpus.CorpusPair` objects."""
        self._request()
        self.embedder_ = self._fit_embedder()
        cfg = self._network_config(self.embedder_.n_features_out_)
        table = self.embedder_.table_
        training = [tp for pair in pairs for tp in corpus.build_training_pairs(pair, cfg, table)]
        if not training:
            raise ValueError("no page in the training data has a positive label")
        self.params_, self.loss_curve_ = network.train(training, cfg)
        self.n_training_pages_ = len(training)
        return self

    @classmethod
    def from_params(cls, params, summary_len=5, embedder=None):
        """Wrap trained parameters, e.g. from :func:`~pagesum.network.load_model`."""
        cfg = params.config
        est = cls(
            page_len=cfg.page_len,
            summary_len=summary_len,
            hidden_size=cfg.hidden_size,
            learning_rate=cfg.learning_rate,
            epochs=cfg.epochs,
            seed=cfg.seed,
            embedder=embedder,
        )
        est.embedder_ = est._fit_embedder()
        if est.embedder_.n_features_out_ != cfg.embed_dim:
            raise ValueError(
                f"embedder dim {est.embedder_.n_features_out_} != model embed_dim {cfg.embed_dim}"
            )
        est.params_ = params
        est._request()
        return est

    def predict(self, X):
        """Summaries of the documents in ``X``."""
        check_is_fitted(self, "params_")
        request = self._request()
        table = self.embedder_.table_
        return [
            summarizer.summarize(doc, request, self.params_, table) for doc in check_documents(X)
        ]

    def summarize(self, doc):
        """Summary of a single document."""
        return self.predict([check_document(doc)])[0]

    def score(self, X, y):
        """Mean ROUGE-1 recall of the predicted summaries against ``y``."""
        refs = check_documents(y, "y")
        summaries = self.predict(X)
        check_consistent_length(summaries, refs)
        recalls = [
            rouge_n(tokenize(s.text), tokenize(r.text), 1).recall for s, r in zip(summaries, refs)
        ]
        return float(np.mean(recalls)) if recalls else 0.0
