"""Extractive summarization with a page-wise feedforward scorer."""

from .embedding import EmbeddingConfig, EmbeddingTable, embed_sentence, load_pretrained
from .estimator import PageSummarizer, SentenceEmbedder
from .network import NetworkConfig, NetworkParams, load_model, save_model, train
from .rouge import rouge_n, sentence_precision
from .summarizer import Summary, SummaryRequest, summarize
from .textproc import Document, Sentence, split_sentences, tokenize

__all__ = [
    "Document",
    "EmbeddingConfig",
    "EmbeddingTable",
    "NetworkConfig",
    "NetworkParams",
    "PageSummarizer",
    "Sentence",
    "SentenceEmbedder",
    "Summary",
    "SummaryRequest",
    "embed_sentence",
    "load_model",
    "load_pretrained",
    "rouge_n",
    "save_model",
    "sentence_precision",
    "split_sentences",
    "summarize",
    "tokenize",
    "train",
]
