"""Word error rate (insertions + deletions + substitutions over reference
length) and binary-classification metrics."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .kernels import align_counts

__all__ = [
    "WerBreakdown",
    "ConfusionCounts",
    "EvalMetrics",
    "align",
    "wer",
    "is_correct",
    "classification_metrics",
]


class UndefinedDenominatorError(ValueError):
    """WER is undefined for an empty reference."""


class EmptyEvaluationError(ValueError):
    """Classification metrics are undefined on zero counts."""


@dataclass(frozen=True)
class WerBreakdown:
    insertions: int
    deletions: int
    substitutions: int
    reference_length: int

    @property
    def errors(self) -> int:
        return self.insertions + self.deletions + self.substitutions


@dataclass(frozen=True)
class ConfusionCounts:
    true_positives: int = 0
    false_positives: int = 0
    false_negatives: int = 0
    true_negatives: int = 0

    @property
    def total(self) -> int:
        return (
            self.true_positives
            + self.false_positives
            + self.false_negatives
            + self.true_negatives
        )


@dataclass(frozen=True)
class EvalMetrics:
    precision: float
    recall: float
    accuracy: float
    f1: float


def _encode_pair(
    reference: Sequence[str], hypothesis: Sequence[str]
) -> tuple[np.ndarray, np.ndarray]:
    ids: dict[str, int] = {}
    for tok in reference:
        ids.setdefault(tok, len(ids))
    for tok in hypothesis:
        ids.setdefault(tok, len(ids))
    ref = np.fromiter((ids[t] for t in reference), dtype=np.int32, count=len(reference))
    hyp = np.fromiter((ids[t] for t in hypothesis), dtype=np.int32, count=len(hypothesis))
    return ref, hyp


def align(reference: Sequence[str], hypothesis: Sequence[str]) -> WerBreakdown:
    """Minimal word-level edit alignment between reference and hypothesis.

    Ties between equal-cost alignments are broken substitution > deletion >
    insertion, so breakdowns are deterministic.
    """
    if len(reference) == 0:
        raise UndefinedDenominatorError("reference must contain at least one word")
    ref, hyp = _encode_pair(reference, hypothesis)
    ins, dele, sub = align_counts(ref, hyp)
    return WerBreakdown(ins, dele, sub, len(reference))


def wer(b: WerBreakdown, *, exact: bool = False) -> float | Fraction:
    """Word error rate (I+D+S)/N; may exceed 1.0 when insertions dominate."""
    if b.reference_length < 1:
        raise UndefinedDenominatorError("reference length must be >= 1")
    ratio = Fraction(b.errors, b.reference_length)
    return ratio if exact else float(ratio)


def is_correct(reference: Sequence[str], hypothesis: Sequence[str]) -> bool:
    """Exact-match comparison of two already-normalized token sequences."""
    return list(reference) == list(hypothesis)


def _ratio(num: int, den: int) -> float:
    # 0/0 is defined as 0.0 by convention
    return num / den if den else 0.0


def classification_metrics(c: ConfusionCounts) -> EvalMetrics:
    """Precision, recall, accuracy and F1 from confusion counts."""
    if c.total == 0:
        raise EmptyEvaluationError("no examples to evaluate")
    precision = _ratio(c.true_positives, c.true_positives + c.false_positives)
    recall = _ratio(c.true_positives, c.true_positives + c.false_negatives)
    accuracy = (c.true_positives + c.true_negatives) / c.total
    f1 = _ratio_f(2 * precision * recall, precision + recall)
    return EvalMetrics(precision=precision, recall=recall, accuracy=accuracy, f1=f1)


def _ratio_f(num: float, den: float) -> float:
    return num / den if den else 0.0
