"""Bag-of-features stance classifier.

A message is embedded as the mean of the vectors of its features: one
per in-vocabulary word plus one per hashed character n-gram (the word
padded as "<word>"). A single linear layer over that mean produces
three-way softmax scores. Training is plain seeded SGD with a linearly
decaying learning rate, single threaded so runs are reproducible.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field, replace
from itertools import product
from pathlib import Path
from typing import Iterable, Iterator, Sequence

import numpy as np

from ..corpus import Message
from ..exceptions import InputError
from ..tokenization import tokenize
from .data import LABELS, LabeledExample

logger = logging.getLogger(__name__)

MODEL_FORMAT_VERSION = 1

DIM_RANGE = (10, 300)
EPOCHS_RANGE = (10, 500)
LR_RANGE = (0.05, 1.0)

FNV_OFFSET = 0x811C9DC5
FNV_PRIME = 0x01000193


@dataclass(frozen=True)
class Hyperparams:
    dim: int = 10
    epochs: int = 10
    lr: float = 0.2
    char_ngram_min: int = 3
    char_ngram_max: int = 6
    bucket: int = 2_000_000
    seed: int = 42

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dim must be positive")
        if self.epochs < 1:
            raise ValueError("epochs must be positive")
        if self.lr <= 0:
            raise ValueError("lr must be positive")
        if self.char_ngram_min < 1:
            raise ValueError("char_ngram_min must be positive")
        if self.char_ngram_max < self.char_ngram_min:
            raise ValueError("char_ngram_max must be >= char_ngram_min")
        if self.bucket < 1:
            raise ValueError("bucket must be positive")

    def to_dict(self) -> dict:
        return {
            "dim": self.dim,
            "epochs": self.epochs,
            "lr": self.lr,
            "char_ngram_min": self.char_ngram_min,
            "char_ngram_max": self.char_ngram_max,
            "bucket": self.bucket,
            "seed": self.seed,
        }


def grid_hyperparams(
    dims: Sequence[int],
    epochs_values: Sequence[int],
    lrs: Sequence[float],
    **common,
) -> list[Hyperparams]:
    """Cartesian product of the three tuned axes, dim varying slowest.

    Values outside the supported ranges are rejected up front so a grid
    search cannot silently explore configurations the trainer was never
    validated on.
    """
    if not dims or not epochs_values or not lrs:
        raise ValueError("each grid axis needs at least one value")
    for dim in dims:
        if not DIM_RANGE[0] <= dim <= DIM_RANGE[1]:
            raise ValueError(f"dim {dim} outside {DIM_RANGE}")
    for epochs in epochs_values:
        if not EPOCHS_RANGE[0] <= epochs <= EPOCHS_RANGE[1]:
            raise ValueError(f"epochs {epochs} outside {EPOCHS_RANGE}")
    for lr in lrs:
        if not LR_RANGE[0] <= lr <= LR_RANGE[1]:
            raise ValueError(f"lr {lr} outside {LR_RANGE}")
    return [
        Hyperparams(dim=dim, epochs=epochs, lr=lr, **common)
        for dim, epochs, lr in product(dims, epochs_values, lrs)
    ]


def fnv1a(data: bytes) -> int:
    """32-bit FNV-1a. Stable across platforms, unlike hash()."""
    value = FNV_OFFSET
    for byte in data:
        value ^= byte
        value = (value * FNV_PRIME) & 0xFFFFFFFF
    return value


def char_ngrams(word: str, minn: int, maxn: int) -> list[str]:
    padded = f"<{word}>"
    grams = []
    for size in range(minn, maxn + 1):
        if size > len(padded):
            break
        for start in range(len(padded) - size + 1):
            grams.append(padded[start : start + size])
    return grams


class FeatureIndexer:
    """Maps tokens to embedding rows: vocab ids first, hashed n-grams after."""

    def __init__(self, vocab: Sequence[str], hp: Hyperparams):
        self.vocab = list(vocab)
        self.word_ids = {word: i for i, word in enumerate(self.vocab)}
        self.hp = hp
        self._word_cache: dict[str, list[int]] = {}

    @property
    def n_rows(self) -> int:
        return len(self.vocab) + self.hp.bucket

    def word_features(self, word: str) -> list[int]:
        cached = self._word_cache.get(word)
        if cached is not None:
            return cached
        rows = []
        word_id = self.word_ids.get(word)
        if word_id is not None:
            rows.append(word_id)
        offset = len(self.vocab)
        for gram in char_ngrams(word, self.hp.char_ngram_min, self.hp.char_ngram_max):
            rows.append(offset + fnv1a(gram.encode("utf-8")) % self.hp.bucket)
        self._word_cache[word] = rows
        return rows

    def text_features(self, text: str) -> list[int]:
        rows = []
        for word in tokenize(text):
            rows.extend(self.word_features(word))
        return rows

    def compress(self, rows: Sequence[int]) -> tuple[np.ndarray, np.ndarray]:
        """Unique rows plus per-row weights summing to 1.

        The embedded text is the feature mean; folding duplicates into
        weights keeps SGD updates exact where fancy-indexed `-=` would
        apply a repeated row only once.
        """
        urows, counts = np.unique(np.asarray(rows, dtype=np.int64), return_counts=True)
        weights = counts / counts.sum()
        return urows, weights


@dataclass
class StanceModel:
    hyperparams: Hyperparams
    vocab: list[str]
    E: np.ndarray  # (len(vocab) + bucket, dim) feature embeddings
    W: np.ndarray  # (len(LABELS), dim) output layer
    b: np.ndarray  # (len(LABELS),)
    labels: tuple[str, ...] = LABELS
    loss_history: list[float] = field(default_factory=list)

    def __post_init__(self):
        self._indexer = FeatureIndexer(self.vocab, self.hyperparams)

    @property
    def indexer(self) -> FeatureIndexer:
        return self._indexer


def log_softmax(z: np.ndarray) -> np.ndarray:
    shifted = z - z.max()
    return shifted - np.log(np.exp(shifted).sum())


def loss_and_grads(
    E: np.ndarray,
    W: np.ndarray,
    b: np.ndarray,
    urows: np.ndarray,
    weights: np.ndarray,
    y: int,
):
    """Cross-entropy loss and gradients for one example.

    Pure in its inputs and dtype generic, which lets tests rerun it in
    float64 against finite differences.
    """
    rows = E[urows]
    h = weights @ rows
    z = W @ h + b
    logp = log_softmax(z)
    loss = -logp[y]
    g = np.exp(logp)
    g[y] -= 1.0
    gh = W.T @ g
    gE_rows = np.outer(weights, gh)
    gW = np.outer(g, h)
    return loss, gE_rows, gW, g


def train(examples: Sequence[LabeledExample], hp: Hyperparams | None = None) -> StanceModel:
    """Train a classifier on labeled examples.

    Deterministic for a fixed seed: initialization, epoch shuffles and
    the update order all derive from one generator.
    """
    hp = hp or Hyperparams()
    examples = list(examples)
    if not examples:
        raise InputError("no training examples")
    if len({ex.label for ex in examples}) < 2:
        raise InputError("degenerate training set: fewer than two distinct labels")

    vocab: dict[str, None] = {}
    tokenized = []
    for ex in examples:
        words = tokenize(ex.text)
        tokenized.append(words)
        for word in words:
            vocab.setdefault(word, None)
    indexer = FeatureIndexer(list(vocab), hp)

    compressed = []
    label_ids = []
    for ex, words in zip(examples, tokenized):
        rows: list[int] = []
        for word in words:
            rows.extend(indexer.word_features(word))
        compressed.append(indexer.compress(rows) if rows else None)
        label_ids.append(LABELS.index(ex.label))

    rng = np.random.default_rng(hp.seed)
    E = (rng.random((indexer.n_rows, hp.dim), dtype=np.float32) * 2 - 1) / hp.dim
    W = np.zeros((len(LABELS), hp.dim), dtype=np.float32)
    b = np.zeros(len(LABELS), dtype=np.float32)

    n = len(examples)
    total_updates = hp.epochs * n
    done = 0
    loss_history = []
    for _ in range(hp.epochs):
        order = rng.permutation(n)
        epoch_loss = 0.0
        for idx in order:
            lr = hp.lr * (1 - done / total_updates)
            done += 1
            pair = compressed[idx]
            if pair is None:
                continue
            urows, weights = pair
            loss, gE_rows, gW, gb = loss_and_grads(E, W, b, urows, weights, label_ids[idx])
            epoch_loss += float(loss)
            E[urows] -= (lr * gE_rows).astype(np.float32)
            W -= (lr * gW).astype(np.float32)
            b -= (lr * gb).astype(np.float32)
        loss_history.append(epoch_loss / n)

    model = StanceModel(hyperparams=hp, vocab=list(vocab), E=E, W=W, b=b)
    model.loss_history = loss_history
    logger.info("trained on %d examples, final epoch loss %.4f", n, loss_history[-1])
    return model


def predict(model: StanceModel, text: str) -> tuple[str, np.ndarray]:
    """Label a text; returns (label, per-class probabilities).

    A text with no extractable features falls back to the bias scores.
    """
    rows = model.indexer.text_features(text)
    if rows:
        urows, weights = model.indexer.compress(rows)
        h = weights @ model.E[urows]
        z = model.W @ h + model.b
    else:
        z = model.b
    probs = np.exp(log_softmax(z.astype(np.float64)))
    return model.labels[int(np.argmax(probs))], probs


def label_corpus(
    model: StanceModel, msgs: Iterable[Message]
) -> Iterator[tuple[Message, str, np.ndarray]]:
    """Predict a stance for each message, preserving input order."""
    for msg in msgs:
        label, probs = predict(model, msg.text)
        yield msg, label, probs


def save_model(model: StanceModel, path) -> None:
    """Write the model: one JSON header line, then raw float32 arrays.

    Arrays are stored little endian in the header's declared order so a
    load reproduces the exact training-time bits.
    """
    header = {
        "format_version": MODEL_FORMAT_VERSION,
        "hyperparams": model.hyperparams.to_dict(),
        "label_order": list(model.labels),
        "vocab": model.vocab,
    }
    with open(path, "wb") as handle:
        handle.write(json.dumps(header, ensure_ascii=False, sort_keys=True).encode("utf-8"))
        handle.write(b"\n")
        for array in (model.E, model.W, model.b):
            handle.write(np.ascontiguousarray(array, dtype="<f4").tobytes())


def load_model(path) -> StanceModel:
    path = Path(path)
    if not path.is_file():
        raise InputError(f"model file not found: {path}")
    with open(path, "rb") as handle:
        header_line = handle.readline()
        try:
            header = json.loads(header_line)
        except json.JSONDecodeError:
            raise InputError(f"{path.name}: malformed model header") from None
        version = header.get("format_version")
        if version != MODEL_FORMAT_VERSION:
            raise InputError(f"{path.name}: unsupported model format {version!r}")
        try:
            hp = Hyperparams(**header["hyperparams"])
            labels = tuple(header["label_order"])
            vocab = list(header["vocab"])
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"{path.name}: bad model header: {exc}") from None
        blob = handle.read()

    n_rows = len(vocab) + hp.bucket
    shapes = [(n_rows, hp.dim), (len(labels), hp.dim), (len(labels),)]
    expected = sum(r * c for r, c in ((s[0], s[1]) if len(s) == 2 else (s[0], 1) for s in shapes))
    data = np.frombuffer(blob, dtype="<f4")
    if data.size != expected:
        raise InputError(f"{path.name}: model payload has {data.size} floats, expected {expected}")
    offset = 0
    arrays = []
    for shape in shapes:
        size = int(np.prod(shape))
        arrays.append(data[offset : offset + size].reshape(shape).copy())
        offset += size
    E, W, b = arrays
    return StanceModel(hyperparams=hp, vocab=vocab, E=E, W=W, b=b, labels=labels)


def with_seed(hp: Hyperparams, seed: int) -> Hyperparams:
    """Same configuration, different seed. Used by CV and grid search."""
    return replace(hp, seed=seed)
