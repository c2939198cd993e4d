"""Label discretization, cross-validation, metrics, and the per-segment
evaluation harness.

run_pipeline standardizes inside each training fold, optionally nests
grid search (and feature selection) on the training part, pools the
out-of-fold predictions, and computes the metrics once on the pool.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from . import featsel
from .cv import CvScheme, make_folds
from .errors import ComputeError
from .metrics import MetricReport, classification_report, regression_metrics
from .models import GridSpec, fit_predict, grid_search, ols_fit
from .spectral import FeatureTable

__all__ = [
    "CvScheme",
    "LABEL_SCHEMES",
    "MetricReport",
    "PipelineResult",
    "classification_report",
    "equal_interval_bins",
    "make_folds",
    "median_split",
    "regression_metrics",
    "run_pipeline",
    "write_classification_report_csv",
    "write_regression_report_csv",
]

LABEL_SCHEMES = ("continuous", "binary_median", "three_equal_interval")


def median_split(scores: np.ndarray) -> tuple[np.ndarray, float]:
    """Binary labels: 1 ("high") iff score > median, ties go low.

    The median is the midpoint of the two central order statistics for
    even n, so distinct scores give classes whose sizes differ by at
    most one.
    """
    scores = np.asarray(scores, dtype=np.float64)
    if len(scores) < 2:
        raise ComputeError(f"median split needs n >= 2, got {len(scores)}")
    if scores.min() == scores.max():
        raise ComputeError("degenerate split: all scores equal")
    med = float(np.median(scores))
    return (scores > med).astype(np.int64), med


def equal_interval_bins(scores: np.ndarray, k: int = 3) -> tuple[np.ndarray, np.ndarray]:
    """k equal-width classes over [min, max]; right-open bins except the
    last, which closes at the maximum. Returns (labels, inner edges)."""
    scores = np.asarray(scores, dtype=np.float64)
    if k < 1:
        raise ComputeError(f"k must be >= 1, got {k}")
    lo, hi = float(scores.min()), float(scores.max())
    if hi == lo:
        raise ComputeError("degenerate binning: max equals min")
    edges = lo + (hi - lo) * np.arange(1, k) / k
    labels = np.searchsorted(edges, scores, side="right")
    labels[scores >= hi] = k - 1
    return labels.astype(np.int64), edges


def _standardize_pair(Xtr: np.ndarray, Xte: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    mean = Xtr.mean(axis=0)
    std = Xtr.std(axis=0)
    std = np.where(std > 0, std, 1.0)
    return (Xtr - mean) / std, (Xte - mean) / std


@dataclass
class PipelineResult:
    report: MetricReport
    y_true: np.ndarray
    predictions: np.ndarray
    extra: dict[str, Any] = field(default_factory=dict)


def run_pipeline(
    table: FeatureTable,
    segment: str,
    scheme: str,
    family: str,
    grid: GridSpec | None = None,
    cv: CvScheme = CvScheme("loo"),
    seed: int = 0,
    feature_idx: list[int] | None = None,
    params: dict | None = None,
    grid_global: bool = False,
    select_within_folds: int | None = None,
) -> PipelineResult:
    """Evaluate one (segment, model) combination.

    scheme "continuous" runs the OLS regression path (MSE/MAE pooled
    out-of-fold, significance from the full-data fit); the two
    discretizations run a classifier family, with grid search nested on
    each training fold by default or hoisted to the full data with
    grid_global. select_within_folds=k re-runs the 5-feature selection
    ensemble inside every training fold instead of using feature_idx.
    """
    if scheme not in LABEL_SCHEMES:
        raise ComputeError(f"unknown label scheme {scheme!r}")
    X_full, y_cont = table.segment_matrix(segment)
    n = len(y_cont)
    if n < 8:
        raise ComputeError(f"pipeline needs >= 8 subjects, got {n}")
    if select_within_folds is None and feature_idx is not None:
        X_full = X_full[:, feature_idx]

    extra: dict[str, Any] = {}
    folds = make_folds(n, cv)
    inner_cv = CvScheme("kfold", 5, seed)

    if scheme == "continuous":
        if family != "ols":
            raise ComputeError("continuous scheme requires the ols family")
        pooled = np.empty(n)
        for train, test in folds:
            Xtr_full = X_full[train]
            if select_within_folds is not None:
                sel = featsel.select_features(
                    Xtr_full, y_cont[train], k=select_within_folds, seed=seed
                )
                Xtr, Xte = Xtr_full[:, sel], X_full[test][:, sel]
            else:
                Xtr, Xte = Xtr_full, X_full[test]
            Xtr, Xte = _standardize_pair(Xtr, Xte)
            fit = ols_fit(Xtr, y_cont[train])
            pooled[test] = fit.predict(Xte)
        mse, mae = regression_metrics(y_cont, pooled)
        if select_within_folds is not None:
            sel = featsel.select_features(X_full, y_cont, k=select_within_folds, seed=seed)
            full_fit = ols_fit(X_full[:, sel], y_cont)
            extra["selected"] = sel.tolist()
        else:
            full_fit = ols_fit(X_full, y_cont)
        report = MetricReport(kind="regression", mse=mse, mae=mae, model_p=full_fit.f_p)
        extra["full_fit"] = full_fit
        return PipelineResult(report=report, y_true=y_cont, predictions=pooled, extra=extra)

    if scheme == "binary_median":
        labels, med = median_split(y_cont)
        n_classes = 2
        extra["median"] = med
    else:
        labels, edges = equal_interval_bins(y_cont, k=3)
        n_classes = 3
        extra["edges"] = edges.tolist()
    if family not in ("lr", "svm", "dt"):
        raise ComputeError(f"unknown classifier family {family!r}")

    if grid is not None and grid_global:
        g = grid_search(family, grid, X_full, labels, inner_cv, n_classes=n_classes, seed=seed)
        params = g.best_params
        grid = None
        extra["global_best_params"] = params

    pooled = np.zeros(n, dtype=np.int64)
    seen = np.zeros(n, dtype=bool)
    skipped = 0
    for train, test in folds:
        if len(np.unique(labels[train])) < 2:
            skipped += 1
            continue
        Xtr_full = X_full[train]
        Xte_full = X_full[test]
        if select_within_folds is not None:
            sel = featsel.select_features(
                Xtr_full, y_cont[train], k=select_within_folds, seed=seed
            )
            Xtr_full, Xte_full = Xtr_full[:, sel], Xte_full[:, sel]
        fold_params = params
        if grid is not None:
            g = grid_search(
                family, grid, Xtr_full, labels[train], inner_cv,
                n_classes=n_classes, seed=seed,
            )
            fold_params = g.best_params
        Xtr, Xte = _standardize_pair(Xtr_full, Xte_full)
        pooled[test] = fit_predict(
            family, fold_params or {}, Xtr, labels[train], Xte, n_classes, seed
        )
        seen[test] = True
    if not seen.any():
        raise ComputeError("every fold was skipped (single-class training data)")
    report = classification_report(labels[seen], pooled[seen], n_classes)
    report.skipped_folds = skipped
    return PipelineResult(report=report, y_true=labels, predictions=pooled, extra=extra)


# ---------------------------------------------------------------------------
# report CSV schemas

CLASSIFICATION_HEADER = ("segment", "model", "accuracy", "precision", "recall", "f1")
REGRESSION_HEADER = ("model", "segment", "mse", "mae", "p")


def write_classification_report_csv(path: str | Path, rows: list[dict]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CLASSIFICATION_HEADER)
        for row in rows:
            writer.writerow(
                [row["segment"], row["model"]]
                + [repr(float(row[k])) for k in ("accuracy", "precision", "recall", "f1")]
            )


def write_regression_report_csv(path: str | Path, rows: list[dict]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(REGRESSION_HEADER)
        for row in rows:
            writer.writerow(
                [row["model"], row["segment"]]
                + [repr(float(row[k])) for k in ("mse", "mae", "p")]
            )
