"""Text-based false-alarm estimator.

Texts that produced a confirmed false alarm in more than half of the
(TTS, ASR) combinations are labeled positive; words are indexed by corpus
frequency, sentences are zero-padded to a fixed length, and a two-layer LSTM
is trained with binary cross-entropy and Adam.
"""
from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass

import numpy as np

from . import textnorm
from .lstm import AdamOptimizer, EstimatorModel, ModelConfig, bce_loss
from .metrics import ConfusionCounts, EvalMetrics, classification_metrics

__all__ = [
    "Vocabulary",
    "LabeledText",
    "EncodedExample",
    "TrainConfig",
    "DivergenceError",
    "build_vocabulary",
    "encode",
    "label_texts",
    "split_dataset",
    "train",
    "evaluate",
    "predict",
    "save_model",
    "load_model",
]

MODEL_FORMAT_VERSION = 1


class DivergenceError(RuntimeError):
    """Training loss became non-finite."""

    def __init__(self, epoch: int, batch: int):
        super().__init__(f"non-finite loss at epoch {epoch}, batch {batch}")
        self.epoch = epoch
        self.batch = batch


@dataclass(frozen=True)
class Vocabulary:
    """Frequency-ranked word index map; index 0 is padding, V+1 is OOV."""

    word_to_index: dict[str, int]

    def __post_init__(self):
        indices = sorted(self.word_to_index.values())
        if indices != list(range(1, len(indices) + 1)):
            raise ValueError("indices must be dense 1..V")

    @property
    def size(self) -> int:
        return len(self.word_to_index)

    @property
    def oov_index(self) -> int:
        return self.size + 1

    def index(self, word: str) -> int:
        return self.word_to_index.get(word, self.oov_index)


def build_vocabulary(corpus: list[list[str]]) -> Vocabulary:
    """Dense frequency-descending indices from 1; frequency ties keep
    first-occurrence order."""
    if not corpus:
        raise ValueError("corpus must be nonempty")
    counts: Counter = Counter()
    first_seen: dict[str, int] = {}
    position = 0
    for tokens in corpus:
        for token in tokens:
            counts[token] += 1
            if token not in first_seen:
                first_seen[token] = position
                position += 1
    ranked = sorted(counts, key=lambda w: (-counts[w], first_seen[w]))
    return Vocabulary({w: i for i, w in enumerate(ranked, start=1)})


def encode(tokens: list[str], vocab: Vocabulary, max_len: int) -> np.ndarray:
    """Word indices zero-padded at the end to max_len; unknown words map to
    the OOV index; longer texts are truncated at the tail."""
    if max_len < 1:
        raise ValueError("max_len must be >= 1")
    out = np.zeros(max_len, dtype=np.int64)
    for pos, token in enumerate(tokens[:max_len]):
        out[pos] = vocab.index(token)
    return out


@dataclass(frozen=True)
class LabeledText:
    text_id: str
    fa_count: int
    combos: int
    label: int


def label_texts(fa_counts: dict[str, int], combos: int) -> list[LabeledText]:
    """Label 1 iff a text produced strictly more confirmed false alarms than
    half the number of (TTS, ASR) combinations."""
    threshold = combos // 2
    out = []
    for text_id, count in fa_counts.items():
        if count > combos:
            raise ValueError(
                f"text {text_id}: false-alarm count {count} exceeds {combos} combos"
            )
        out.append(
            LabeledText(
                text_id=text_id,
                fa_count=count,
                combos=combos,
                label=1 if count > threshold else 0,
            )
        )
    return out


@dataclass(frozen=True)
class EncodedExample:
    indices: np.ndarray
    label: int
    text_id: str


def split_dataset(
    examples: list, seed: int
) -> tuple[list, list, list]:
    """Seeded shuffle, then 60/10/30 train/validation/test by the floor rule:
    test = floor(0.3 n), validation = floor(0.1 n), train = remainder."""
    if not examples:
        raise ValueError("examples must be nonempty")
    n = len(examples)
    order = np.random.default_rng(seed).permutation(n)
    shuffled = [examples[i] for i in order]
    n_test = int(n * 3 // 10)
    n_val = int(n // 10)
    n_train = n - n_test - n_val
    return (
        shuffled[:n_train],
        shuffled[n_train : n_train + n_val],
        shuffled[n_train + n_val :],
    )


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 20
    batch_size: int = 32
    learning_rate: float = 1e-3
    seed: int = 0
    embed_dim: int = 64
    hidden_dim: int = 64
    max_len: int | None = None  # None: longest training sentence

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")


def _stack(examples: list[EncodedExample]) -> tuple[np.ndarray, np.ndarray]:
    x = np.stack([e.indices for e in examples])
    y = np.array([e.label for e in examples], dtype=np.float64)
    return x, y


def train(
    model: EstimatorModel,
    train_set: list[EncodedExample],
    val_set: list[EncodedExample],
    cfg: TrainConfig,
) -> tuple[EstimatorModel, list[dict]]:
    """Mini-batch Adam training; deterministic given cfg.seed.

    Returns the trained model and per-epoch {train_loss, val_loss} history.
    """
    if not train_set or not val_set:
        raise ValueError("train and validation sets must be nonempty")
    x_train, y_train = _stack(train_set)
    x_val, y_val = _stack(val_set)
    optimizer = AdamOptimizer(learning_rate=cfg.learning_rate)
    rng = np.random.default_rng(cfg.seed)
    history: list[dict] = []
    n = len(train_set)
    for epoch in range(cfg.epochs):
        order = rng.permutation(n)
        epoch_losses = []
        for batch_no, start in enumerate(range(0, n, cfg.batch_size)):
            idx = order[start : start + cfg.batch_size]
            loss, grads = model.loss_and_grads(x_train[idx], y_train[idx])
            if not np.isfinite(loss):
                raise DivergenceError(epoch, batch_no)
            optimizer.step(model, grads)
            epoch_losses.append(loss)
        val_loss = bce_loss(model.forward(x_val), y_val)
        history.append(
            {
                "epoch": epoch,
                "train_loss": float(np.mean(epoch_losses)),
                "val_loss": val_loss,
            }
        )
    return model, history


def evaluate(
    model: EstimatorModel, test_set: list[EncodedExample], threshold: float = 0.5
) -> EvalMetrics:
    """Classify at the threshold (ties negative) and compute the four
    classification metrics."""
    if not test_set:
        raise ValueError("test set must be nonempty")
    x, y = _stack(test_set)
    probs = model.forward(x)
    predicted = probs > threshold
    actual = y > 0.5
    counts = ConfusionCounts(
        true_positives=int(np.sum(predicted & actual)),
        false_positives=int(np.sum(predicted & ~actual)),
        false_negatives=int(np.sum(~predicted & actual)),
        true_negatives=int(np.sum(~predicted & ~actual)),
    )
    return classification_metrics(counts)


def predict(
    model: EstimatorModel, vocab: Vocabulary, raw: str
) -> tuple[float, bool]:
    """Normalize, encode and score one raw text; flag = probability > 0.5."""
    if vocab.size + 2 != model.config.embedding_rows:
        raise ValueError(
            f"vocabulary size {vocab.size} incompatible with model "
            f"({model.config.vocab_size})"
        )
    tokens = textnorm.normalize_text(raw)
    x = encode(tokens, vocab, model.config.max_len)
    prob = float(model.forward(x[None, :])[0])
    return prob, prob > 0.5


def save_model(model: EstimatorModel, vocab: Vocabulary, path) -> None:
    """Persist as an npz container with a mandatory version field."""
    words = [None] * vocab.size
    for word, idx in vocab.word_to_index.items():
        words[idx - 1] = word
    meta = {
        "version": MODEL_FORMAT_VERSION,
        "vocab_size": model.config.vocab_size,
        "embed_dim": model.config.embed_dim,
        "hidden_dim": model.config.hidden_dim,
        "max_len": model.config.max_len,
        "vocabulary": words,
    }
    arrays = {f"param_{k}": v for k, v in model.params.items()}
    np.savez(path, meta=np.frombuffer(json.dumps(meta).encode("utf-8"), dtype=np.uint8), **arrays)


def load_model(path) -> tuple[EstimatorModel, Vocabulary]:
    with np.load(path) as data:
        meta = json.loads(bytes(data["meta"]).decode("utf-8"))
        if meta.get("version") != MODEL_FORMAT_VERSION:
            raise ValueError(
                f"unsupported model format version {meta.get('version')!r}"
            )
        config = ModelConfig(
            vocab_size=meta["vocab_size"],
            embed_dim=meta["embed_dim"],
            hidden_dim=meta["hidden_dim"],
            max_len=meta["max_len"],
        )
        params = {
            k[len("param_"):]: data[k] for k in data.files if k.startswith("param_")
        }
    model = EstimatorModel(config, params)
    vocab = Vocabulary({w: i for i, w in enumerate(meta["vocabulary"], start=1)})
    return model, vocab
