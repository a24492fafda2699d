"""Test-error reports, per-iteration error curves, two-proportion p-values."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .boost import BoostedModel, TrainingLog, predict_class_batch
from .data import Dataset


@dataclass(frozen=True)
class EvalReport:
    n_test: int
    error_count: int
    error_rate: float
    confusion: np.ndarray | None = None  # confusion[true, predicted]


def error_count(model: BoostedModel, test: Dataset) -> EvalReport:
    """Misclassification count of the argmax decision rule on a test set."""
    if test.num_features != model.num_features:
        raise ValueError(
            f"model expects {model.num_features} features, test set has "
            f"{test.num_features}")
    if test.num_classes > model.num_classes:
        raise ValueError("test set declares more classes than the model")
    pred = predict_class_batch(model, test.features)
    errors = int(np.sum(pred != test.labels))
    k = model.num_classes
    confusion = np.zeros((k, k), dtype=np.int64)
    np.add.at(confusion, (test.labels, pred), 1)
    return EvalReport(test.num_samples, errors, errors / test.num_samples, confusion)


def p_value(e1: int, e2: int, n: int) -> float:
    """One-sided two-proportion z-test: is error rate 2 lower than rate 1?

    Each proportion's variance is estimated separately as p(1-p)/n and the
    upper normal tail P(Z > z) is returned via math.erfc (full double
    precision up to its underflow near z ~ 26.5, reported as 0 beyond).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if not (0 <= e1 <= n and 0 <= e2 <= n):
        raise ValueError("error counts must lie in [0, n]")
    p1, p2 = e1 / n, e2 / n
    var = p1 * (1.0 - p1) / n + p2 * (1.0 - p2) / n
    if var == 0.0:
        if e1 == e2:
            return 0.5
        return 0.0 if p1 > p2 else 1.0
    z = (p1 - p2) / math.sqrt(var)
    return 0.5 * math.erfc(z / math.sqrt(2.0))


def error_curve(log: TrainingLog) -> list[tuple[int, int]]:
    """(iteration, test error count) series from a monitored training log."""
    if not log.test_errors:
        raise ValueError("training log carries no monitor errors")
    return [(m + 1, e) for m, e in enumerate(log.test_errors)]


def write_curve_csv(path, log: TrainingLog) -> None:
    """Emit `iteration,train_loss,test_errors` rows (test column blank if absent)."""
    with open(path, "w") as fh:
        fh.write("iteration,train_loss,test_errors\n")
        for m, loss in enumerate(log.train_loss):
            err = "" if not log.test_errors else str(log.test_errors[m])
            fh.write(f"{m + 1},{loss!r},{err}\n")
