"""Metrics and evaluation protocols: confusion matrices, per-class
precision/recall/F1, and stratified k-fold cross-validation."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .classifiers import ClassifierConfig, Dataset, predict_many, train_model
from .errors import ConfigError, ContractViolation, StratificationError
from .pose import CLASS_LABELS


@dataclass(frozen=True)
class ConfusionMatrix:
    """Counts over (truth, prediction) cells; class 1 = Fight is positive."""

    tn: int
    fp: int
    fn: int
    tp: int

    def __post_init__(self):
        if min(self.tn, self.fp, self.fn, self.tp) < 0:
            raise ContractViolation("confusion counts must be non-negative")

    @property
    def total(self) -> int:
        return self.tn + self.fp + self.fn + self.tp


@dataclass(frozen=True)
class ClassMetrics:
    precision: float
    recall: float
    f1: float


@dataclass(frozen=True)
class EvaluationReport:
    confusion: ConfusionMatrix
    accuracy: float
    per_class: Mapping[str, ClassMetrics]


@dataclass(frozen=True)
class CvReport:
    """Per-fold reports plus their aggregate.

    The averaged report carries arithmetic means of the per-fold metric
    values (macro averaging) next to the summed confusion counts.
    """

    per_fold: tuple[EvaluationReport, ...]
    averaged: EvaluationReport

    @property
    def k(self) -> int:
        return len(self.per_fold)


def confusion(preds, truths) -> ConfusionMatrix:
    p = np.asarray(preds, dtype=int)
    t = np.asarray(truths, dtype=int)
    if p.shape != t.shape or p.ndim != 1:
        raise ContractViolation("predictions and truths must be 1-D and equally long")
    if p.size == 0:
        raise ContractViolation("cannot build a confusion matrix from zero samples")
    return ConfusionMatrix(
        tn=int(((t == 0) & (p == 0)).sum()),
        fp=int(((t == 0) & (p == 1)).sum()),
        fn=int(((t == 1) & (p == 0)).sum()),
        tp=int(((t == 1) & (p == 1)).sum()),
    )


def _prf(correct: int, predicted: int, actual: int) -> ClassMetrics:
    # Degenerate 0/0 ratios are defined as 0.
    precision = correct / predicted if predicted else 0.0
    recall = correct / actual if actual else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return ClassMetrics(precision, recall, f1)


def metrics(cm: ConfusionMatrix) -> EvaluationReport:
    """Accuracy plus per-class precision, recall and F1."""
    if cm.total < 1:
        raise ContractViolation("metrics need at least one evaluated sample")
    accuracy = (cm.tp + cm.tn) / cm.total
    per_class = {
        CLASS_LABELS[0]: _prf(cm.tn, cm.tn + cm.fn, cm.tn + cm.fp),
        CLASS_LABELS[1]: _prf(cm.tp, cm.tp + cm.fp, cm.tp + cm.fn),
    }
    return EvaluationReport(cm, accuracy, per_class)


def evaluate_model(model, data: Dataset) -> EvaluationReport:
    preds = predict_many(model, data.features)
    return metrics(confusion(preds, data.labels))


def stratified_fold_assignment(labels, k: int, seed: int) -> np.ndarray:
    """Fold id per row: per-class round-robin after a seeded shuffle.

    Guarantees per-class fold sizes that differ by at most one. Raises
    StratificationError when some fold would end up with an empty test set
    or with a training set missing a class.
    """
    labs = np.asarray(labels, dtype=int)
    if k < 2:
        raise ConfigError("k must be >= 2")
    if labs.size < k:
        raise ContractViolation(f"need at least k={k} rows, got {labs.size}")
    if not ((labs == 0).any() and (labs == 1).any()):
        raise ContractViolation("both classes must be present")
    rng = np.random.default_rng(seed)
    fold = np.empty(labs.size, dtype=int)
    for cls in (0, 1):
        idx = np.flatnonzero(labs == cls)
        rng.shuffle(idx)
        fold[idx] = np.arange(idx.size) % k
    for f in range(k):
        if not (fold == f).any():
            raise StratificationError(f"fold {f} would have an empty test set")
        train_labels = labs[fold != f]
        if not ((train_labels == 0).any() and (train_labels == 1).any()):
            raise StratificationError(
                f"training rows of fold {f} would miss a class; dataset too small"
            )
    return fold


def kfold_cv(data: Dataset, config: ClassifierConfig, k: int = 5, seed: int = 42) -> CvReport:
    """Stratified k-fold cross-validation of one classifier configuration.

    Each fold serves once as the test set with the remainder as training
    data; the same seed feeds both the fold assignment and the classifier.
    """
    assignment = stratified_fold_assignment(data.labels, k, seed)
    per_fold = []
    for f in range(k):
        train = data.subset(np.flatnonzero(assignment != f))
        test = data.subset(np.flatnonzero(assignment == f))
        model = train_model(config, train)
        per_fold.append(metrics(confusion(predict_many(model, test.features), test.labels)))

    summed = ConfusionMatrix(
        tn=sum(r.confusion.tn for r in per_fold),
        fp=sum(r.confusion.fp for r in per_fold),
        fn=sum(r.confusion.fn for r in per_fold),
        tp=sum(r.confusion.tp for r in per_fold),
    )
    averaged = EvaluationReport(
        confusion=summed,
        accuracy=float(np.mean([r.accuracy for r in per_fold])),
        per_class={
            label: ClassMetrics(
                precision=float(np.mean([r.per_class[label].precision for r in per_fold])),
                recall=float(np.mean([r.per_class[label].recall for r in per_fold])),
                f1=float(np.mean([r.per_class[label].f1 for r in per_fold])),
            )
            for label in CLASS_LABELS
        },
    )
    return CvReport(tuple(per_fold), averaged)
