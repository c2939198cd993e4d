"""Hyperparameter grids and exhaustive grid search.

The stock grids (TABLE_GRIDS) are the tuned value lists for the three
classifier families; cells are enumerated row-major in the order the
parameters are declared. Cell scores are pooled out-of-fold metrics.
Behavior-identical cells (the logistic `dual` flag is recorded but
inert; gamma/degree do nothing for a linear kernel; a decision tree
cannot use min_samples_split below 2*min_samples_leaf) share one
cached evaluation, but the per-cell table always has one row per cell.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from itertools import product
from typing import Any

import numpy as np

from ..cv import CvScheme, make_folds
from ..errors import ComputeError
from ..metrics import classification_report
from .logistic import logistic_decision, logistic_fit, logistic_predict
from .svm import svm_decision, svm_fit, svm_predict
from .tree import tree_decision, tree_fit, tree_predict

GridSpec = list[tuple[str, list[Any]]]

TABLE_GRIDS: dict[str, GridSpec] = {
    "lr": [
        ("C", [1.0, 1.5, 2.0, 2.5]),
        ("dual", [True, False]),
        ("max_iter", [100, 110, 120, 130, 140]),
    ],
    "svm": [
        ("C", [0.001, 0.01, 0.1]),
        ("gamma", [0.001, 0.01, 0.1, 1.0]),
        ("kernel", ["linear", "poly"]),
        ("degree", [1, 2, 3, 4, 5]),
    ],
    "dt": [
        ("max_features", ["auto", "sqrt", "log2"]),
        ("min_samples_leaf", list(range(1, 16))),
        ("min_samples_split", list(range(2, 16))),
        ("criterion", ["entropy", "gini"]),
    ],
}

# tuned best values, usable as fixed hyperparameters when no search is wanted
TABLE_BEST: dict[str, dict[str, Any]] = {
    "lr": {"C": 2.0, "dual": True, "max_iter": 100},
    "svm": {"C": 0.1, "gamma": 0.1, "kernel": "poly", "degree": 5},
    "dt": {
        "max_features": "auto",
        "min_samples_leaf": 10,
        "min_samples_split": 6,
        "criterion": "gini",
    },
}

FAMILIES = ("lr", "svm", "dt")


def grid_cells(grid: GridSpec) -> list[dict[str, Any]]:
    """All cells in row-major order of the declared parameters."""
    if not grid or any(not values for _, values in grid):
        raise ComputeError("grid must have at least one value per parameter")
    names = [name for name, _ in grid]
    return [dict(zip(names, combo)) for combo in product(*(v for _, v in grid))]


def _standardize_pair(Xtr: np.ndarray, Xte: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    mean = Xtr.mean(axis=0)
    std = Xtr.std(axis=0)
    std = np.where(std > 0, std, 1.0)
    return (Xtr - mean) / std, (Xte - mean) / std


def _fit_binary(family: str, params: dict, Xtr, ytr, seed: int):
    if family == "lr":
        if "dual" in params:
            warnings.warn(
                "logistic 'dual' flag is recorded for grid fidelity but has no effect",
                stacklevel=2,
            )
        return logistic_fit(
            Xtr, ytr, C=params.get("C", 1.0), max_iter=params.get("max_iter", 100)
        )
    if family == "svm":
        return svm_fit(
            Xtr,
            np.where(ytr > 0, 1.0, -1.0),
            C=params.get("C", 1.0),
            gamma=params.get("gamma", 0.1),
            kernel=params.get("kernel", "linear"),
            degree=params.get("degree", 3),
        )
    if family == "dt":
        return tree_fit(
            Xtr,
            ytr.astype(np.int64),
            criterion=params.get("criterion", "gini"),
            min_samples_leaf=params.get("min_samples_leaf", 1),
            min_samples_split=params.get("min_samples_split", 2),
            max_features=params.get("max_features", "auto"),
            seed=seed,
            n_classes=2,
        )
    raise ComputeError(f"unknown model family {family!r}")


def _predict_binary(family: str, model, X) -> np.ndarray:
    if family == "lr":
        return logistic_predict(model, X)[0]
    if family == "svm":
        return (svm_predict(model, X) > 0).astype(np.int64)
    return tree_predict(model, X)


def _decision_binary(family: str, model, X) -> np.ndarray:
    if family == "lr":
        return logistic_decision(model, X)
    if family == "svm":
        return svm_decision(model, X)
    return tree_decision(model, X)


def fit_predict(
    family: str,
    params: dict,
    Xtr: np.ndarray,
    ytr: np.ndarray,
    Xte: np.ndarray,
    n_classes: int,
    seed: int = 0,
) -> np.ndarray:
    """Fit one classifier cell and predict test labels.

    Binary uses the family directly; more classes go one-vs-rest with
    ties broken by the highest decision score, then the lowest class.
    Inputs are expected to be standardized by the caller.
    """
    if n_classes == 2:
        model = _fit_binary(family, params, Xtr, (ytr > 0).astype(np.float64), seed)
        return _predict_binary(family, model, Xte).astype(np.int64)
    scores = np.full((len(Xte), n_classes), -np.inf)
    for c in range(n_classes):
        y_bin = (ytr == c).astype(np.float64)
        if y_bin.min() == y_bin.max():
            if y_bin.max() == 1.0:  # only class c present in training
                scores[:, c] = np.inf
            continue
        model = _fit_binary(family, params, Xtr, y_bin, seed)
        scores[:, c] = _decision_binary(family, model, Xte)
    return np.argmax(scores, axis=1).astype(np.int64)


def _effective_key(family: str, params: dict, n_features: int) -> tuple:
    """Collapse parameters that cannot change the fitted model."""
    if family == "lr":
        return ("lr", params.get("C", 1.0), params.get("max_iter", 100))
    if family == "svm":
        if params.get("kernel", "linear") == "linear":
            return ("svm", "linear", params.get("C", 1.0))
        return (
            "svm",
            "poly",
            params.get("C", 1.0),
            params.get("gamma", 0.1),
            params.get("degree", 3),
        )
    if family == "dt":
        leaf = params.get("min_samples_leaf", 1)
        split = max(params.get("min_samples_split", 2), 2 * leaf)
        return (
            "dt",
            _n_considered(params.get("max_features", "auto"), n_features),
            leaf,
            split,
            params.get("criterion", "gini"),
        )
    raise ComputeError(f"unknown model family {family!r}")


def _n_considered(max_features: str, p: int) -> int:
    if max_features == "auto":
        return p
    if max_features == "sqrt":
        return max(1, int(math.sqrt(p)))
    return max(1, int(math.log2(p)))


@dataclass
class CellScore:
    params: dict[str, Any]
    score: float
    failed: bool = False
    error: str = ""


@dataclass
class GridSearchResult:
    best_params: dict[str, Any]
    best_score: float
    cells: list[CellScore] = field(default_factory=list)


def grid_search(
    family: str,
    grid: GridSpec,
    X: np.ndarray,
    y: np.ndarray,
    cv: CvScheme,
    metric: str = "accuracy",
    n_classes: int = 2,
    seed: int = 0,
) -> GridSearchResult:
    """Exhaustively score every grid cell by cross-validation.

    Per cell: pooled out-of-fold predictions over the CV folds (each
    fold standardized on its training part), scored with `metric`.
    Failed cells are recorded and skipped; ties prefer the earliest
    cell in row-major order.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    cells = grid_cells(grid)
    folds = make_folds(len(y), cv)
    if metric not in ("f1", "accuracy"):
        raise ComputeError(f"unknown grid metric {metric!r}")

    cache: dict[tuple, tuple[float, bool, str]] = {}
    results: list[CellScore] = []
    for params in cells:
        key = _effective_key(family, params, X.shape[1])
        if key not in cache:
            try:
                pooled = np.empty(len(y), dtype=np.int64)
                seen = np.zeros(len(y), dtype=bool)
                for train, test in folds:
                    if len(np.unique(y[train])) < 2:
                        continue
                    Xtr, Xte = _standardize_pair(X[train], X[test])
                    pooled[test] = fit_predict(
                        family, params, Xtr, y[train], Xte, n_classes, seed
                    )
                    seen[test] = True
                if not seen.any():
                    raise ComputeError("every fold had single-class training data")
                rep = classification_report(y[seen], pooled[seen], n_classes)
                score = rep.f1 if metric == "f1" else rep.accuracy
                cache[key] = (float(score), False, "")
            except ComputeError as exc:
                cache[key] = (math.nan, True, str(exc))
        score, failed, err = cache[key]
        results.append(CellScore(params=params, score=score, failed=failed, error=err))

    best = None
    for cell in results:
        if not cell.failed and (best is None or cell.score > best.score):
            best = cell
    if best is None:
        raise ComputeError("grid search failed: every cell errored")
    return GridSearchResult(best_params=best.params, best_score=best.score, cells=results)
