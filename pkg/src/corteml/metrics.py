"""Regression and classification metrics (shared leaf module).

Re-exported by `corteml.evaluate`; lives here so grid search can score
cells without an import cycle.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ComputeError


@dataclass
class MetricReport:
    kind: str  # "regression" | "classification"
    mse: float | None = None
    mae: float | None = None
    model_p: float | None = None
    accuracy: float | None = None
    precision: float | None = None
    recall: float | None = None
    f1: float | None = None
    skipped_folds: int = 0


def regression_metrics(y: np.ndarray, y_hat: np.ndarray) -> tuple[float, float]:
    """(MSE, MAE) of predictions against observations."""
    y = np.asarray(y, dtype=np.float64)
    y_hat = np.asarray(y_hat, dtype=np.float64)
    if y.shape != y_hat.shape:
        raise ComputeError(f"length mismatch: {y.shape} vs {y_hat.shape}")
    if len(y) == 0:
        raise ComputeError("empty input")
    err = y - y_hat
    return float((err**2).mean()), float(np.abs(err).mean())


def _prf(tp: float, fp: float, fn: float) -> tuple[float, float, float]:
    precision = tp / (tp + fp) if tp + fp > 0 else 0.0
    recall = tp / (tp + fn) if tp + fn > 0 else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
    return precision, recall, f1


def classification_report(
    y: np.ndarray, y_hat: np.ndarray, n_classes: int
) -> MetricReport:
    """Accuracy / precision / recall / F1.

    Binary: metrics for the positive class (label 1, the "high" group).
    Multiclass: per-class metrics averaged with support weights, which
    makes the weighted recall equal the accuracy.
    """
    y = np.asarray(y, dtype=np.int64)
    y_hat = np.asarray(y_hat, dtype=np.int64)
    if y.shape != y_hat.shape:
        raise ComputeError(f"length mismatch: {y.shape} vs {y_hat.shape}")
    if len(y) == 0:
        raise ComputeError("empty input")
    if y.min() < 0 or y.max() >= n_classes or y_hat.min() < 0 or y_hat.max() >= n_classes:
        raise ComputeError(f"labels outside range [0, {n_classes})")
    accuracy = float((y == y_hat).mean())
    if n_classes == 2:
        tp = float(((y == 1) & (y_hat == 1)).sum())
        fp = float(((y == 0) & (y_hat == 1)).sum())
        fn = float(((y == 1) & (y_hat == 0)).sum())
        precision, recall, f1 = _prf(tp, fp, fn)
    else:
        n = len(y)
        precision = recall = f1 = 0.0
        for c in range(n_classes):
            support = float((y == c).sum())
            if support == 0:
                continue  # absent classes carry zero weight
            tp = float(((y == c) & (y_hat == c)).sum())
            fp = float(((y != c) & (y_hat == c)).sum())
            fn = float(((y == c) & (y_hat != c)).sum())
            p_c, r_c, f_c = _prf(tp, fp, fn)
            w = support / n
            precision += w * p_c
            recall += w * r_c
            f1 += w * f_c
    return MetricReport(
        kind="classification",
        accuracy=accuracy,
        precision=float(precision),
        recall=float(recall),
        f1=float(f1),
    )
