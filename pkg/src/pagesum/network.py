"""One-hidden-layer page scorer trained with softmax cross-entropy.

A page of ``page_len`` sentence vectors is flattened into one input vector.
The output layer has one unit per sentence slot and a softmax restricted to
the slots that hold a real sentence.
"""

from __future__ import annotations

import logging
import struct
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
from scipy.linalg.blas import dger

from .embedding import fnv1a_64

__all__ = [
    "ContractError",
    "Gradients",
    "ModelFormatError",
    "NetworkConfig",
    "NetworkParams",
    "Page",
    "TargetDistribution",
    "backward",
    "cross_entropy",
    "forward",
    "grad_check",
    "init_params",
    "load_model",
    "model_bytes",
    "random_instance",
    "save_model",
    "sgd_step",
    "train",
]

logger = logging.getLogger(__name__)

LOG_EPS = 1e-12
MAGIC = b"PSUM1"
_MASK64 = (1 << 64) - 1


class ContractError(ValueError):
    """Inputs violate a shape or precondition contract."""


class ModelFormatError(ValueError):
    """A model file has a bad magic, a bad checksum or is truncated."""


@dataclass(frozen=True)
class NetworkConfig:
    page_len: int = 40
    embed_dim: int = 100
    hidden_size: int = 500
    learning_rate: float = 0.02
    epochs: int = 20
    seed: int = 0

    def __post_init__(self):
        if self.page_len < 1:
            raise ContractError(f"page_len must be >= 1, got {self.page_len}")
        if self.embed_dim < 1:
            raise ContractError(f"embed_dim must be >= 1, got {self.embed_dim}")
        if self.hidden_size < 1:
            raise ContractError(f"hidden_size must be >= 1, got {self.hidden_size}")
        if not self.learning_rate > 0:
            raise ContractError(f"learning_rate must be > 0, got {self.learning_rate}")
        if self.epochs < 1:
            raise ContractError(f"epochs must be >= 1, got {self.epochs}")

    @property
    def input_size(self) -> int:
        return self.page_len * self.embed_dim


@dataclass(frozen=True, eq=False)
class NetworkParams:
    W1: np.ndarray
    b1: np.ndarray
    W2: np.ndarray
    b2: np.ndarray
    config: NetworkConfig

    def __post_init__(self):
        cfg = self.config
        expected = {
            "W1": (cfg.hidden_size, cfg.input_size),
            "b1": (cfg.hidden_size,),
            "W2": (cfg.page_len, cfg.hidden_size),
            "b2": (cfg.page_len,),
        }
        for name, shape in expected.items():
            arr = getattr(self, name)
            if arr.shape != shape:
                raise ContractError(f"{name} has shape {arr.shape}, expected {shape}")

    def arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        return self.W1, self.b1, self.W2, self.b2

    def copy(self) -> "NetworkParams":
        return replace(self, **{k: v.copy() for k, v in zip("W1 b1 W2 b2".split(), self.arrays())})


@dataclass(frozen=True, eq=False)
class Gradients:
    dW1: np.ndarray
    db1: np.ndarray
    dW2: np.ndarray
    db2: np.ndarray

    def arrays(self):
        return self.dW1, self.db1, self.dW2, self.db2


@dataclass(frozen=True, eq=False)
class Page:
    """``page_len`` sentence slots; real sentences first, zero padding after."""

    vectors: np.ndarray
    mask: np.ndarray
    sentence_refs: tuple[int, ...] = field(default=())

    def __post_init__(self):
        mask = np.asarray(self.mask, dtype=bool)
        object.__setattr__(self, "mask", mask)
        if self.vectors.ndim != 2 or self.vectors.shape[0] != mask.shape[0]:
            raise ContractError("vectors and mask disagree on page_len")
        n_real = int(mask.sum())
        if n_real == 0:
            raise ContractError("a page needs at least one real sentence")
        if not mask[:n_real].all():
            raise ContractError("real sentence slots must form a prefix of the page")
        if np.any(self.vectors[n_real:]):
            raise ContractError("padding rows must be zero")
        if self.sentence_refs and len(self.sentence_refs) != n_real:
            raise ContractError("sentence_refs must list one index per real slot")

    @property
    def page_len(self) -> int:
        return self.mask.shape[0]

    @property
    def n_real(self) -> int:
        return int(self.mask.sum())

    @classmethod
    def from_rows(cls, rows: np.ndarray, page_len: int, sentence_refs=()) -> "Page":
        rows = np.asarray(rows, dtype=np.float64)
        if not 1 <= rows.shape[0] <= page_len:
            raise ContractError(f"need 1..{page_len} sentence rows, got {rows.shape[0]}")
        vectors = np.zeros((page_len, rows.shape[1]))
        vectors[: rows.shape[0]] = rows
        mask = np.zeros(page_len, dtype=bool)
        mask[: rows.shape[0]] = True
        return cls(vectors, mask, tuple(sentence_refs))


@dataclass(frozen=True, eq=False)
class TargetDistribution:
    probs: np.ndarray

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=np.float64)
        object.__setattr__(self, "probs", probs)
        if np.any(probs < 0) or abs(probs.sum() - 1.0) > 1e-9:
            raise ContractError("target must be a probability distribution")

    @classmethod
    def uniform_over(cls, positives, page_len: int) -> "TargetDistribution":
        """Uniform mass over the given slot indices (one-hot for a single slot)."""
        positives = sorted(set(int(i) for i in positives))
        if not positives:
            raise ContractError("target needs at least one positive slot")
        probs = np.zeros(page_len)
        probs[positives] = 1.0 / len(positives)
        return cls(probs)

    def check_page(self, page: Page) -> None:
        if self.probs.shape != page.mask.shape:
            raise ContractError("target and page disagree on page_len")
        if np.any(self.probs[~page.mask] != 0):
            raise ContractError("target puts mass on padding slots")


def init_params(config: NetworkConfig) -> NetworkParams:
    """Glorot-uniform weights from ``config.seed``, zero biases."""
    rng = np.random.default_rng(config.seed & _MASK64)

    def glorot(fan_out, fan_in):
        bound = np.sqrt(6.0 / (fan_in + fan_out))
        return rng.uniform(-bound, bound, (fan_out, fan_in))

    W1 = glorot(config.hidden_size, config.input_size)
    W2 = glorot(config.page_len, config.hidden_size)
    return NetworkParams(
        W1, np.zeros(config.hidden_size), W2, np.zeros(config.page_len), config
    )


def _check_page(page: Page, params: NetworkParams) -> None:
    cfg = params.config
    if page.vectors.shape != (cfg.page_len, cfg.embed_dim):
        raise ContractError(
            f"page shape {page.vectors.shape} does not match "
            f"({cfg.page_len}, {cfg.embed_dim})"
        )


def masked_softmax(logits: np.ndarray, mask: np.ndarray) -> np.ndarray:
    probs = np.zeros_like(logits, dtype=np.float64)
    z = logits[mask]
    e = np.exp(z - z.max())
    probs[mask] = e / e.sum()
    return probs


def forward(page: Page, params: NetworkParams):
    """Return ``(hidden, logits, probs)`` for one page."""
    _check_page(page, params)
    x = page.vectors.reshape(-1)
    hidden = np.tanh(params.W1 @ x + params.b1)
    logits = params.W2 @ hidden + params.b2
    return hidden, logits, masked_softmax(logits, page.mask)


def cross_entropy(probs: np.ndarray, target: TargetDistribution, mask=None) -> float:
    """``-sum(target * log(probs + 1e-12))`` over real slots."""
    t = target.probs
    if mask is None:
        mask = t > 0
    return float(-np.sum(t[mask] * np.log(probs[mask] + LOG_EPS)))


def _loss(page, params, target) -> float:
    _, _, probs = forward(page, params)
    return cross_entropy(probs, target, page.mask)


def backward(page: Page, params: NetworkParams, target: TargetDistribution) -> Gradients:
    """Analytic gradients of the page loss with respect to every parameter."""
    target.check_page(page)
    hidden, _, probs = forward(page, params)
    delta_out = np.where(page.mask, probs - target.probs, 0.0)
    delta_hidden = (params.W2.T @ delta_out) * (1.0 - hidden**2)
    x = page.vectors.reshape(-1)
    return Gradients(
        dW1=np.outer(delta_hidden, x),
        db1=delta_hidden,
        dW2=np.outer(delta_out, hidden),
        db2=delta_out,
    )


def sgd_step(params: NetworkParams, grads: Gradients, lr: float) -> NetworkParams:
    updated = [p - lr * g for p, g in zip(params.arrays(), grads.arrays())]
    return NetworkParams(*updated, config=params.config)


def _sample_coordinates(params: NetworkParams, n_samples: int, seed: int):
    """At least ``n_samples`` (array index, flat index) pairs spread over all arrays."""
    rng = np.random.default_rng(seed)
    arrays = params.arrays()
    per_array = -(-n_samples // len(arrays))
    coords = []
    for a, arr in enumerate(arrays):
        if arr.size <= per_array:
            picked = np.arange(arr.size)
        else:
            picked = np.sort(rng.choice(arr.size, per_array, replace=False))
        coords.extend((a, int(i)) for i in picked)
    return coords


class _LossProbe:
    """Loss under a single-coordinate perturbation, in extended precision.

    Only one hidden unit or one logit moves when a single parameter is
    perturbed, so the unperturbed pre-activations are computed once and each
    probe costs O(page_len). Evaluating in ``longdouble`` keeps rounding noise
    in the central difference far below the smallest gradients that matter.
    """

    def __init__(self, page: Page, params: NetworkParams, target: TargetDistribution):
        ld = np.longdouble
        self.x = page.vectors.reshape(-1).astype(ld)
        self.W2 = params.W2.astype(ld)
        self.pre = params.W1.astype(ld) @ self.x + params.b1.astype(ld)
        self.hidden = np.tanh(self.pre)
        self.logits = self.W2 @ self.hidden + params.b2.astype(ld)
        self.keep = page.mask & (target.probs > 0)
        self.t = target.probs.astype(ld)[self.keep]
        self.mask = page.mask
        self.n_in = params.W1.shape[1]

    def _from_logits(self, z) -> np.longdouble:
        zm = z[self.mask]
        e = np.exp(zm - zm.max())
        probs = np.zeros_like(z)
        probs[self.mask] = e / e.sum()
        return -np.sum(self.t * np.log(probs[self.keep] + np.longdouble(LOG_EPS)))

    def _hidden_shift(self, j: int, new_pre) -> np.longdouble:
        return self._from_logits(self.logits + self.W2[:, j] * (np.tanh(new_pre) - self.hidden[j]))

    def loss(self, array: int, index: int, delta: float) -> np.longdouble:
        d = np.longdouble(delta)
        if array == 0:
            j, i = divmod(index, self.n_in)
            return self._hidden_shift(j, self.pre[j] + d * self.x[i])
        if array == 1:
            return self._hidden_shift(index, self.pre[index] + d)
        z = self.logits.copy()
        if array == 2:
            k, j = divmod(index, self.W2.shape[1])
            z[k] += d * self.hidden[j]
        else:
            z[index] += d
        return self._from_logits(z)


def grad_check(
    params: NetworkParams,
    page: Page,
    target: TargetDistribution,
    eps: float = 1e-5,
    n_samples: int = 200,
    seed: int = 0,
    grad_fn=backward,
) -> float:
    """Maximum relative error between ``grad_fn`` and central differences.

    ``grad_fn`` defaults to :func:`backward`; tests substitute a corrupted
    version to make sure the check fires.
    """
    if not eps > 0:
        raise ContractError("eps must be positive")
    _check_page(page, params)
    target.check_page(page)
    analytic = grad_fn(page, params, target).arrays()
    probe = _LossProbe(page, params, target)
    base = _loss(page, params, target)
    if abs(float(probe.loss(3, 0, 0.0)) - base) > 1e-9 * max(1.0, abs(base)):
        logger.error("extended-precision loss disagrees with forward(): %r", base)
        return float("inf")
    worst = 0.0
    for a, i in _sample_coordinates(params, n_samples, seed):
        numeric = float((probe.loss(a, i, eps) - probe.loss(a, i, -eps)) / (2 * np.longdouble(eps)))
        g = float(analytic[a].reshape(-1)[i])
        rel = abs(g - numeric) / max(abs(g), abs(numeric), 1e-8)
        worst = max(worst, rel)
    return worst


def train(pairs, config: NetworkConfig):
    """Per-example SGD over ``(Page, TargetDistribution)`` pairs.

    Returns the trained parameters and the mean loss of each epoch. Each
    recorded loss is measured on the parameters before that example's update.
    """
    pairs = list(pairs)
    if not pairs:
        raise ContractError("training set is empty")
    for page, target in pairs:
        if page.vectors.shape != (config.page_len, config.embed_dim):
            raise ContractError("training page does not match the network config")
        target.check_page(page)

    params = init_params(config).copy()
    order_rng = np.random.default_rng([config.seed & _MASK64, 1])
    losses = []
    for epoch in range(config.epochs):
        total = 0.0
        for j in order_rng.permutation(len(pairs)):
            page, target = pairs[j]
            total += _sgd_update_inplace(page, params, target, config.learning_rate)
        losses.append(total / len(pairs))
        logger.info("epoch %d/%d mean loss %.6f", epoch + 1, config.epochs, losses[-1])
    return params, losses


def _sgd_update_inplace(page, params, target, lr) -> float:
    """``backward`` followed by ``sgd_step``, updating ``params`` in place.

    The rank-1 update of W1 goes through BLAS ``dger`` so the outer product
    is never materialized. Returns the loss before the update.
    """
    hidden, _, probs = forward(page, params)
    loss = cross_entropy(probs, target, page.mask)
    delta_out = np.where(page.mask, probs - target.probs, 0.0)
    delta_hidden = (params.W2.T @ delta_out) * (1.0 - hidden**2)
    x = page.vectors.reshape(-1)
    # W1 is C-contiguous, so W1.T is its Fortran-ordered view
    dger(-lr, x, delta_hidden, a=params.W1.T, overwrite_a=1)
    np.subtract(params.b1, lr * delta_hidden, out=params.b1)
    np.subtract(params.W2, lr * np.outer(delta_out, hidden), out=params.W2)
    np.subtract(params.b2, lr * delta_out, out=params.b2)
    return loss


def model_bytes(params: NetworkParams) -> bytes:
    cfg = params.config
    body = bytearray(MAGIC)
    body += struct.pack("<III", cfg.page_len, cfg.embed_dim, cfg.hidden_size)
    for arr in params.arrays():
        body += np.ascontiguousarray(arr, dtype="<f8").tobytes()
    body += struct.pack("<Q", fnv1a_64(bytes(body)))
    return bytes(body)


def save_model(params: NetworkParams, path) -> None:
    Path(path).write_bytes(model_bytes(params))


def parse_model(data: bytes, config: NetworkConfig | None = None) -> NetworkParams:
    """Decode model bytes. Training-only fields are taken from ``config``."""
    header = len(MAGIC) + 12
    if len(data) < header + 8 or data[: len(MAGIC)] != MAGIC:
        raise ModelFormatError("not a model file (bad magic)")
    (checksum,) = struct.unpack("<Q", data[-8:])
    if fnv1a_64(data[:-8]) != checksum:
        raise ModelFormatError("model checksum mismatch")
    page_len, embed_dim, hidden_size = struct.unpack("<III", data[len(MAGIC) : header])
    base = config or NetworkConfig()
    try:
        cfg = replace(base, page_len=page_len, embed_dim=embed_dim, hidden_size=hidden_size)
    except ContractError as exc:
        raise ModelFormatError(str(exc)) from None
    shapes = [
        (hidden_size, page_len * embed_dim),
        (hidden_size,),
        (page_len, hidden_size),
        (page_len,),
    ]
    expected = header + 8 * sum(int(np.prod(s)) for s in shapes) + 8
    if len(data) != expected:
        raise ModelFormatError(f"model file has {len(data)} bytes, expected {expected}")
    arrays = []
    offset = header
    for shape in shapes:
        n = int(np.prod(shape))
        arr = np.frombuffer(data, dtype="<f8", count=n, offset=offset).reshape(shape)
        arrays.append(arr.astype(np.float64))
        offset += 8 * n
    return NetworkParams(*arrays, config=cfg)


def load_model(path, config: NetworkConfig | None = None) -> NetworkParams:
    return parse_model(Path(path).read_bytes(), config)


def random_instance(config: NetworkConfig, seed: int):
    """A seeded ``(params, page, target)`` triple for gradient checking.

    Weights come from :func:`init_params`, biases are small and non-zero, the
    page holds a random number of unit-length rows, and the target is uniform
    over a random subset of the real slots.
    """
    rng = np.random.default_rng([seed & _MASK64, 2])
    base = init_params(replace(config, seed=seed))
    params = NetworkParams(
        base.W1,
        rng.normal(0.0, 0.1, config.hidden_size),
        base.W2,
        rng.normal(0.0, 0.1, config.page_len),
        base.config,
    )
    n_real = int(rng.integers(1, config.page_len + 1))
    rows = rng.normal(size=(n_real, config.embed_dim))
    rows /= np.linalg.norm(rows, axis=1, keepdims=True)
    page = Page.from_rows(rows, config.page_len)
    k = int(rng.integers(1, n_real + 1))
    target = TargetDistribution.uniform_over(rng.choice(n_real, k, replace=False), config.page_len)
    return params, page, target
