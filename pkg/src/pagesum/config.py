"""Run configuration: flat ``key = value`` files plus command-line overrides.

Example file::

    # training
    page_len = 40
    hidden_size = 500
    learning_rate = 0.02
    corpus_root = data/synthetic
    model_path = model.psum
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, fields
from pathlib import Path

from .embedding import EmbeddingConfig
from .network import NetworkConfig
from .summarizer import SummaryRequest

__all__ = ["ConfigError", "RunConfig", "load_config", "parse_config_text"]


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    page_len: int = 40
    embed_dim: int = 100
    hidden_size: int = 500
    learning_rate: float = 0.02
    epochs: int = 20
    seed: int = 0
    ngram_min: int = 3
    ngram_max: int = 6
    bucket_count: int = 2_000_000
    pretrained: str | None = None
    corpus_root: str | None = None
    model_path: str = "model.psum"
    summary_len: int = 5
    train_fraction: float = 0.75
    body_tag: str = "TEXT"
    eval_csv: str | None = None
    sweep_csv: str | None = None

    def __post_init__(self):
        if not 1 <= self.summary_len <= self.page_len:
            raise ConfigError(
                f"summary_len ({self.summary_len}) must be between 1 and page_len ({self.page_len})"
            )
        try:
            self.network_config()
            self.embedding_config()
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        if not 0 < self.train_fraction < 1:
            raise ConfigError(f"train_fraction must be in (0, 1), got {self.train_fraction}")

    def network_config(self, **overrides) -> NetworkConfig:
        kw = dict(
            page_len=self.page_len,
            embed_dim=self.embed_dim,
            hidden_size=self.hidden_size,
            learning_rate=self.learning_rate,
            epochs=self.epochs,
            seed=self.seed,
        )
        kw.update(overrides)
        return NetworkConfig(**kw)

    def embedding_config(self) -> EmbeddingConfig:
        return EmbeddingConfig(
            dim=self.embed_dim,
            ngram_min=self.ngram_min,
            ngram_max=self.ngram_max,
            bucket_count=self.bucket_count,
            seed=self.seed,
        )

    def request(self, page_len: int | None = None) -> SummaryRequest:
        return SummaryRequest(self.summary_len, page_len or self.page_len)

    def updated(self, **changes) -> "RunConfig":
        values = asdict(self)
        values.update({k: v for k, v in changes.items() if v is not None})
        return RunConfig(**values)


_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _coerce(key: str, raw: str):
    kind = _TYPES[key]
    try:
        if kind == "int":
            return int(raw)
        if kind == "float":
            return float(raw)
    except ValueError:
        raise ConfigError(f"{key}: expected {kind}, got {raw!r}") from None
    return raw


def parse_config_text(text: str) -> dict:
    values = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, raw = line.partition("=")
        key = key.strip().replace("-", "_")
        if not sep:
            raise ConfigError(f"line {lineno}: expected key = value")
        if key not in _TYPES:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        values[key] = _coerce(key, raw.strip())
    return values


def load_config(path=None, **overrides) -> RunConfig:
    """File values first, then non-``None`` overrides."""
    values = {}
    if path is not None:
        values = parse_config_text(Path(path).read_text(encoding="utf-8"))
    values.update({k: v for k, v in overrides.items() if v is not None})
    return RunConfig(**values)
