"""Command-line interface.

Exit codes: 0 success, 1 check failure, 2 missing or unreadable input,
3 unwritable output, 4 corrupt model.
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import sys
from pathlib import Path

import numpy as np

from . import corpus, network
from .config import ConfigError, RunConfig, load_config
from .corpus import SplitSpec
from .estimator import PageSummarizer, SentenceEmbedder
from .rouge import format_table, report_csv, rouge_n, sentence_precision
from .textproc import tokenize

log = logging.getLogger("pagesum")

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_INPUT = 2
EXIT_OUTPUT = 3
EXIT_CORRUPT_MODEL = 4

GRADCHECK_TOLERANCE = 1e-4
DEFAULT_PAGE_LENS = (10, 20, 40, 50, 100, 200)


class CommandError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def _embedder(cfg: RunConfig) -> SentenceEmbedder:
    emb = SentenceEmbedder(
        dim=cfg.embed_dim,
        ngram_min=cfg.ngram_min,
        ngram_max=cfg.ngram_max,
        bucket_count=cfg.bucket_count,
        seed=cfg.seed,
        pretrained_path=cfg.pretrained,
    )
    try:
        return emb.fit()
    except OSError as exc:
        raise CommandError(f"cannot read pretrained vectors: {exc}", EXIT_INPUT) from None
    except ValueError as exc:
        raise CommandError(str(exc), EXIT_INPUT) from None


def _load_pairs(cfg: RunConfig):
    if not cfg.corpus_root:
        raise CommandError("no corpus given (use --corpus or corpus_root)", EXIT_INPUT)
    try:
        pairs = corpus.load_corpus(cfg.corpus_root, cfg.body_tag)
    except (OSError, corpus.CorpusError) as exc:
        raise CommandError(f"cannot read corpus: {exc}", EXIT_INPUT) from None
    if not pairs:
        raise CommandError(f"no document/summary pairs under {cfg.corpus_root}", EXIT_INPUT)
    return pairs


def _split(cfg: RunConfig, pairs):
    return corpus.split_train_eval(pairs, SplitSpec(cfg.train_fraction, cfg.seed))


def _fit(cfg: RunConfig, train_pairs, page_len=None) -> PageSummarizer:
    model = PageSummarizer(
        page_len=page_len or cfg.page_len,
        summary_len=cfg.summary_len,
        hidden_size=cfg.hidden_size,
        learning_rate=cfg.learning_rate,
        epochs=cfg.epochs,
        seed=cfg.seed,
        embedder=_embedder(cfg),
    )
    try:
        return model.fit_pairs(train_pairs)
    except ValueError as exc:
        raise CommandError(str(exc), EXIT_INPUT) from None


def _load_model(cfg: RunConfig) -> PageSummarizer:
    path = Path(cfg.model_path)
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise CommandError(f"cannot read model: {exc}", EXIT_INPUT) from None
    try:
        params = network.parse_model(data, cfg.network_config())
    except network.ModelFormatError as exc:
        raise CommandError(f"{path}: {exc}", EXIT_CORRUPT_MODEL) from None
    if params.config.page_len < cfg.summary_len:
        raise CommandError("summary_len exceeds the model's page_len", EXIT_INPUT)
    return PageSummarizer.from_params(params, cfg.summary_len, _embedder(cfg))


def _write_text(path, text: str) -> None:
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise CommandError(f"cannot write {path}: {exc}", EXIT_OUTPUT) from None


def evaluate(model: PageSummarizer, pairs):
    """Per-document ``(doc_id, rouge1, rouge2, precision)`` plus a ``MEAN`` row."""
    summaries = model.predict([p.document for p in pairs])
    rows = []
    for pair, summary in zip(pairs, summaries):
        cand = tokenize(summary.text)
        ref = tokenize(pair.reference_summary.text)
        rows.append(
            (
                pair.doc_id,
                rouge_n(cand, ref, 1).recall,
                rouge_n(cand, ref, 2).recall,
                sentence_precision(summary.indices, pair.reference_indices),
            )
        )
    if rows:
        means = np.mean([r[1:] for r in rows], axis=0)
        rows.append(("MEAN", *(float(m) for m in means)))
    return rows


# Commands ------------------------------------------------------------------


def cmd_train(cfg: RunConfig, args) -> int:
    train_pairs, _ = _split(cfg, _load_pairs(cfg))
    model = _fit(cfg, train_pairs)
    for epoch, loss in enumerate(model.loss_curve_, start=1):
        print(f"epoch {epoch:3d}  mean loss {loss:.6f}")
    _write_bytes(cfg.model_path, network.model_bytes(model.params_))
    print(f"wrote {cfg.model_path} ({model.n_training_pages_} training pages)")
    return EXIT_OK


def _write_bytes(path, data: bytes) -> None:
    try:
        Path(path).write_bytes(data)
    except OSError as exc:
        raise CommandError(f"cannot write {path}: {exc}", EXIT_OUTPUT) from None


def cmd_summarize(cfg: RunConfig, args) -> int:
    model = _load_model(cfg)
    try:
        doc = corpus.read_document(args.input, cfg.body_tag)
    except (OSError, UnicodeDecodeError, corpus.CorpusError) as exc:
        raise CommandError(f"cannot read {args.input}: {exc}", EXIT_INPUT) from None
    summary = model.summarize(doc)
    for idx, raw in zip(summary.indices, summary.sentences):
        line = " ".join(raw.split())
        print(f"{line}\t{idx}" if args.indices else line)
    return EXIT_OK


def cmd_eval(cfg: RunConfig, args) -> int:
    model = _load_model(cfg)
    _, eval_pairs = _split(cfg, _load_pairs(cfg))
    if not eval_pairs:
        raise CommandError("evaluation split is empty", EXIT_INPUT)
    rows = evaluate(model, eval_pairs)
    print(format_table(rows, ("doc_id", "rouge1_recall", "rouge2_recall", "precision")))
    if cfg.eval_csv:
        _write_text(cfg.eval_csv, report_csv(rows))
    return EXIT_OK


def sweep_csv(results) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["page_len", "rouge1_recall", "rouge2_recall"])
    for page_len, r1, r2 in sorted(results):
        writer.writerow([page_len, f"{r1:.6f}", f"{r2:.6f}"])
    return buf.getvalue()


def cmd_sweep(cfg: RunConfig, args) -> int:
    train_pairs, eval_pairs = _split(cfg, _load_pairs(cfg))
    if not eval_pairs:
        raise CommandError("evaluation split is empty", EXIT_INPUT)
    results = []
    for page_len in sorted(set(args.page_lens)):
        model = _fit(cfg, train_pairs, page_len=page_len)
        mean = evaluate(model, eval_pairs)[-1]
        results.append((page_len, mean[1], mean[2]))
        log.info("page_len %d: rouge1 %.4f rouge2 %.4f", page_len, mean[1], mean[2])
    text = sweep_csv(results)
    if cfg.sweep_csv:
        _write_text(cfg.sweep_csv, text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_gradcheck(cfg: RunConfig, args) -> int:
    net_cfg = cfg.network_config()
    grad_fn = network.backward
    if args.corrupt_gradient:
        scale = 1.0 + args.corrupt_gradient

        def grad_fn(page, params, target):
            g = network.backward(page, params, target)
            return network.Gradients(*(a * scale for a in g.arrays()))

    worst = 0.0
    for i in range(args.instances):
        params, page, target = network.random_instance(net_cfg, cfg.seed + i)
        err = network.grad_check(params, page, target, eps=args.eps, seed=cfg.seed + i, grad_fn=grad_fn)
        worst = max(worst, err)
    print(f"max relative error {worst:.6e} over {args.instances} instances (eps={args.eps:g})")
    return EXIT_OK if worst <= GRADCHECK_TOLERANCE else EXIT_CHECK_FAILED


def cmd_gencorpus(cfg: RunConfig, args) -> int:
    if not cfg.corpus_root:
        raise CommandError("no output directory given (use --corpus)", EXIT_INPUT)
    try:
        ids = corpus.generate_corpus(cfg.corpus_root, args.n_docs, cfg.seed, cfg.summary_len)
    except OSError as exc:
        raise CommandError(f"cannot write corpus: {exc}", EXIT_OUTPUT) from None
    print(f"wrote {len(ids)} documents to {cfg.corpus_root}")
    return EXIT_OK


# Argument parsing ------------------------------------------------------------


def _page_len_list(text: str) -> list[int]:
    try:
        values = [int(v) for v in text.replace(" ", "").split(",") if v]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a list of integers: {text!r}") from None
    if not values or min(values) < 1:
        raise argparse.ArgumentTypeError("page lengths must be positive integers")
    return values


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value configuration file")
    common.add_argument("--seed", type=int)
    common.add_argument("--page-len", type=int, dest="page_len")
    common.add_argument("--summary-len", type=int, dest="summary_len")
    common.add_argument("--model", dest="model_path")
    common.add_argument("--corpus", dest="corpus_root")
    common.add_argument("--hidden-size", type=int, dest="hidden_size")
    common.add_argument("--learning-rate", type=float, dest="learning_rate")
    common.add_argument("--epochs", type=int)
    common.add_argument("--pretrained", help="text word-vector file")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(
        prog="pagesum", description="Recursive page-wise extractive summarization."
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("train", parents=[common], help="train a model on a corpus")

    p = sub.add_parser("summarize", parents=[common], help="summarize one document")
    p.add_argument("input", help="plain text or DUC-style XML document")
    p.add_argument("--indices", action="store_true", help="print source sentence indices")

    p = sub.add_parser("eval", parents=[common], help="ROUGE and precision on the eval split")
    p.add_argument("--output", dest="eval_csv", help="CSV report path")

    p = sub.add_parser("sweep", parents=[common], help="train and evaluate per page_len")
    p.add_argument(
        "--page-lens",
        type=_page_len_list,
        default=list(DEFAULT_PAGE_LENS),
        help="comma separated page lengths (default: %(default)s)",
    )
    p.add_argument("--output", dest="sweep_csv", help="CSV output path (default: stdout)")

    p = sub.add_parser("gradcheck", parents=[common], help="finite-difference gradient check")
    p.add_argument("--instances", type=int, default=20)
    p.add_argument("--eps", type=float, default=1e-5)
    p.add_argument("--corrupt-gradient", type=float, default=0.0, help=argparse.SUPPRESS)

    p = sub.add_parser("gencorpus", parents=[common], help="write a synthetic labelled corpus")
    p.add_argument("--n-docs", type=int, default=200, dest="n_docs")
    return parser


_COMMANDS = {
    "train": cmd_train,
    "summarize": cmd_summarize,
    "eval": cmd_eval,
    "sweep": cmd_sweep,
    "gradcheck": cmd_gradcheck,
    "gencorpus": cmd_gencorpus,
}

_CONFIG_KEYS = (
    "seed", "page_len", "summary_len", "model_path", "corpus_root",
    "hidden_size", "learning_rate", "epochs", "pretrained", "eval_csv", "sweep_csv",
)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    overrides = {k: getattr(args, k, None) for k in _CONFIG_KEYS}
    try:
        cfg = load_config(args.config, **overrides)
    except OSError as exc:
        print(f"pagesum: cannot read config: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (ConfigError, ValueError, TypeError) as exc:
        parser.error(str(exc))

    if args.command == "sweep":
        too_short = [n for n in args.page_lens if n < cfg.summary_len]
        if too_short:
            parser.error(f"page lengths {too_short} are shorter than summary_len {cfg.summary_len}")
    if args.command == "gencorpus" and args.n_docs < 1:
        parser.error("--n-docs must be >= 1")
    if args.command == "gradcheck" and (args.instances < 1 or args.eps <= 0):
        parser.error("--instances must be >= 1 and --eps > 0")

    try:
        return _COMMANDS[args.command](cfg, args)
    except CommandError as exc:
        print(f"pagesum {args.command}: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
