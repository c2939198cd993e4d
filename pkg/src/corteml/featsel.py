"""Feature-ranking ensemble and correlation reporting.

Five rankings over the 15 asymmetry features: |coefficient| of OLS,
lasso (CV-chosen lambda, coordinate descent) and ridge (lambda = 1,
closed form) on standardized columns, recursive feature elimination
under a refitted linear model, and random-forest mean decrease in
impurity. Rankings are averaged into a mean rank and the top-k subset.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import statmath
from .cv import CvScheme, make_folds
from .errors import ComputeError, DataError

RANK_METHODS = ("ols", "lasso", "ridge", "rfe", "random_forest")

LASSO_TOL = 1e-8
LASSO_MAX_SWEEPS = 10_000
RIDGE_LAMBDA = 1.0
N_TREES = 100


@dataclass
class FeatureRanking:
    method: str
    ranks: np.ndarray  # 1-based, rank 1 = most important
    scores: np.ndarray


@dataclass
class AggregatedRanking:
    mean_rank: np.ndarray
    selected: np.ndarray  # indices of the k best features, ascending


@dataclass
class CorrelationReport:
    r: np.ndarray
    p: np.ndarray
    degenerate: list[int] = field(default_factory=list)


def _constant_columns(X: np.ndarray) -> np.ndarray:
    """Numerically constant columns (std at rounding level of the mean)."""
    return X.std(axis=0) <= 1e-12 * np.maximum(1.0, np.abs(X.mean(axis=0)))


def _standardize(X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Zero-mean unit-variance columns; returns (Xs, zero_variance mask)."""
    mean = X.mean(axis=0)
    std = X.std(axis=0)
    zero = _constant_columns(X)
    safe = np.where(zero, 1.0, std)
    Xs = (X - mean) / safe
    Xs[:, zero] = 0.0
    return Xs, zero


def _ranking_from_scores(
    method: str, scores: np.ndarray, tiebreak: np.ndarray, dead: np.ndarray
) -> FeatureRanking:
    """Rank by descending score, then descending tiebreak, then index.

    `dead` columns (zero variance) are forced to the very bottom with
    score 0.
    """
    p = len(scores)
    scores = np.where(dead, 0.0, scores)
    order = np.lexsort((np.arange(p), -np.abs(tiebreak), -np.abs(scores), dead))
    ranks = np.empty(p, dtype=np.int64)
    ranks[order] = np.arange(1, p + 1)
    return FeatureRanking(method=method, ranks=ranks, scores=scores)


def _check_xy(X: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if X.ndim != 2:
        raise ComputeError(f"X must be 2-D, got {X.shape}")
    if y.shape != (X.shape[0],):
        raise ComputeError(f"y must have shape ({X.shape[0]},), got {y.shape}")
    return X, y


def _warn_dead(dead: np.ndarray) -> None:
    if dead.any():
        cols = np.flatnonzero(dead).tolist()
        warnings.warn(f"zero-variance feature column(s) ranked last: {cols}", stacklevel=3)


def _lasso_path_fit(G, c, n, lambdas, w0=None):
    """Cyclic coordinate descent along a descending lambda path."""
    p = len(c)
    w = np.zeros(p) if w0 is None else w0.copy()
    diag = np.diag(G).copy()
    solutions = []
    for lam in lambdas:
        for _ in range(LASSO_MAX_SWEEPS):
            max_delta = 0.0
            for j in range(p):
                if diag[j] == 0.0:
                    continue
                rho = c[j] - G[j] @ w + diag[j] * w[j]
                target = rho / n
                if target > lam:
                    new = (target - lam) / (diag[j] / n)
                elif target < -lam:
                    new = (target + lam) / (diag[j] / n)
                else:
                    new = 0.0
                delta = new - w[j]
                if delta != 0.0:
                    w[j] = new
                    max_delta = max(max_delta, abs(delta))
            if max_delta < LASSO_TOL:
                break
        solutions.append(w.copy())
    return solutions


def _lasso_cv_fit(Xs, yc, seed: int) -> np.ndarray:
    """Lasso weights at the 5-fold-CV-best lambda (ties -> larger lambda)."""
    n, p = Xs.shape
    c_full = Xs.T @ yc
    lam_max = float(np.abs(c_full).max()) / n
    if lam_max == 0.0:
        return np.zeros(p)
    lambdas = np.geomspace(lam_max, lam_max * 1e-3, 20)
    folds = make_folds(n, CvScheme("kfold", 5, seed))
    mse = np.zeros(len(lambdas))
    for train, test in folds:
        Xtr, Xte = Xs[train], Xs[test]
        ytr, yte = yc[train], yc[test]
        sols = _lasso_path_fit(Xtr.T @ Xtr, Xtr.T @ ytr, len(train), lambdas)
        for i, w in enumerate(sols):
            err = yte - Xte @ w
            mse[i] += float(err @ err) / len(test)
    best = 0
    for i in range(1, len(lambdas)):
        if mse[i] < mse[best]:
            best = i
    return _lasso_path_fit(Xs.T @ Xs, c_full, n, lambdas[: best + 1])[-1]


def rank_by_linear_models(
    X: np.ndarray, y: np.ndarray, seed: int = 0
) -> tuple[FeatureRanking, FeatureRanking, FeatureRanking]:
    """(ols, lasso, ridge) rankings by |coefficient| on standardized columns.

    Exact ties (lasso zeroing several coefficients) are broken by the
    residual gradient magnitude |X^T r|, the order in which the lasso
    path would admit them.
    """
    X, y = _check_xy(X, y)
    n, p = X.shape
    if n <= p:
        raise ComputeError(f"underdetermined: OLS ranking needs n > {p}, got n={n}")
    Xs, dead = _standardize(X)
    _warn_dead(dead)
    yc = y - y.mean()

    w_ols, *_ = np.linalg.lstsq(Xs, yc, rcond=None)
    w_lasso = _lasso_cv_fit(Xs, yc, seed)
    w_ridge = np.linalg.solve(Xs.T @ Xs + RIDGE_LAMBDA * np.eye(p), Xs.T @ yc)

    rankings = []
    for method, w in (("ols", w_ols), ("lasso", w_lasso), ("ridge", w_ridge)):
        grad = Xs.T @ (yc - Xs @ w)
        rankings.append(_ranking_from_scores(method, np.abs(w), grad, dead))
    return tuple(rankings)


def rfe_rank(X: np.ndarray, y: np.ndarray) -> FeatureRanking:
    """Recursive feature elimination: drop the weakest |coefficient| of a
    linear fit on the standardized survivors, one per round; the last
    survivor gets rank 1."""
    X, y = _check_xy(X, y)
    n, p = X.shape
    if n <= p:
        raise ComputeError(f"underdetermined: RFE needs n > {p}, got n={n}")
    Xs, dead = _standardize(X)
    _warn_dead(dead)
    yc = y - y.mean()

    ranks = np.zeros(p, dtype=np.int64)
    next_rank = p
    # zero-variance columns drop out first
    for j in sorted(np.flatnonzero(dead), reverse=True):
        ranks[j] = next_rank
        next_rank -= 1
    active = [j for j in range(p) if not dead[j]]
    while len(active) > 1:
        w, *_ = np.linalg.lstsq(Xs[:, active], yc, rcond=None)
        weakest = int(np.argmin(np.abs(w)))
        ranks[active[weakest]] = next_rank
        next_rank -= 1
        active.pop(weakest)
    if active:
        ranks[active[0]] = next_rank
    scores = (p + 1.0 - ranks) / p
    return FeatureRanking(method="rfe", ranks=ranks, scores=np.where(dead, 0.0, scores))


def _variance_split(Xn: np.ndarray, yn: np.ndarray):
    """Best variance-reducing split over all features of one node.

    Returns (sse_decrease, feature, threshold) or None.
    """
    m = len(yn)
    if m < 2:
        return None
    order = np.argsort(Xn, axis=0, kind="stable")
    vs = np.take_along_axis(Xn, order, axis=0)
    ys = yn[order]
    csum = np.cumsum(ys, axis=0)
    csum2 = np.cumsum(ys**2, axis=0)
    nl = np.arange(1, m, dtype=np.float64)[:, None]
    nr = m - nl
    sl, sl2 = csum[:-1], csum2[:-1]
    sr, sr2 = csum[-1] - sl, csum2[-1] - sl2
    sse_children = (sl2 - sl**2 / nl) + (sr2 - sr**2 / nr)
    sse_total = float(csum2[-1, 0] - csum[-1, 0] ** 2 / m)
    decrease = sse_total - sse_children
    decrease[vs[1:] <= vs[:-1]] = -np.inf
    flat = int(np.argmax(decrease))
    pos, feat = flat // Xn.shape[1], flat % Xn.shape[1]
    if not np.isfinite(decrease[pos, feat]) or decrease[pos, feat] <= 1e-12:
        return None
    thr = float((vs[pos, feat] + vs[pos + 1, feat]) / 2.0)
    return float(decrease[pos, feat]), int(feat), thr


def rf_importance(
    X: np.ndarray, y: np.ndarray, n_trees: int = N_TREES, seed: int = 0
) -> FeatureRanking:
    """Mean-decrease-in-impurity importances of a regression forest.

    Bootstrap per tree, variance criterion, all features considered at
    every node; per-tree importances normalized then averaged, final
    vector normalized to sum to 1.
    """
    X, y = _check_xy(X, y)
    n, p = X.shape
    if n < 10:
        raise ComputeError(f"too few samples for a forest: n={n} < 10")
    dead = _constant_columns(X)
    total = np.zeros(p)

    def grow(Xn, yn, imp, n_tree):
        split = _variance_split(Xn, yn)
        if split is None:
            return
        decrease, feat, thr = split
        imp[feat] += decrease / n_tree
        mask = Xn[:, feat] <= thr
        grow(Xn[mask], yn[mask], imp, n_tree)
        grow(Xn[~mask], yn[~mask], imp, n_tree)

    for t in range(n_trees):
        rng = np.random.default_rng([seed, t])
        boot = rng.integers(0, n, n)
        imp = np.zeros(p)
        grow(X[boot], y[boot], imp, n)
        s = imp.sum()
        if s > 0:
            total += imp / s
    s = total.sum()
    importances = total / s if s > 0 else np.full(p, 1.0 / p)
    return _ranking_from_scores("random_forest", importances, importances, dead)


def aggregate_rankings(rankings: list[FeatureRanking], k: int = 5) -> AggregatedRanking:
    """Unweighted mean rank; the k smallest mean ranks are selected,
    ties broken by canonical feature order."""
    if not rankings:
        raise ComputeError("aggregate_rankings needs at least one ranking")
    p = len(rankings[0].ranks)
    for r in rankings:
        if len(r.ranks) != p:
            raise ComputeError("rankings cover different feature sets")
        if sorted(r.ranks) != list(range(1, p + 1)):
            raise ComputeError(f"ranking {r.method!r} is not a permutation of 1..{p}")
    if not 0 < k <= p:
        raise ComputeError(f"k must be in [1, {p}], got {k}")
    mean_rank = np.mean([r.ranks for r in rankings], axis=0)
    order = np.argsort(mean_rank, kind="stable")
    selected = np.sort(order[:k])
    return AggregatedRanking(mean_rank=mean_rank, selected=selected)


def correlate(X: np.ndarray, y: np.ndarray) -> CorrelationReport:
    """Pearson r per feature with two-sided p from the t distribution."""
    X, y = _check_xy(X, y)
    n, p = X.shape
    if n < 3:
        raise ComputeError(f"correlation needs n >= 3, got {n}")
    yc = y - y.mean()
    sy = float(np.sqrt((yc**2).sum()))
    if sy == 0.0:
        raise ComputeError("y has zero variance")
    r = np.zeros(p)
    pv = np.ones(p)
    degenerate = []
    constant = _constant_columns(X)
    for j in range(p):
        if constant[j]:
            degenerate.append(j)
            warnings.warn(f"zero-variance feature {j}: r reported as 0", stacklevel=2)
            continue
        xc = X[:, j] - X[:, j].mean()
        sx = float(np.sqrt((xc**2).sum()))
        rj = float(xc @ yc) / (sx * sy)
        rj = min(1.0, max(-1.0, rj))
        r[j] = rj
        if 1.0 - rj * rj <= 0.0:
            pv[j] = 0.0
        else:
            t = rj * np.sqrt((n - 2) / (1.0 - rj * rj))
            pv[j] = statmath.two_sided_t_p(float(t), float(n - 2))
    return CorrelationReport(r=r, p=pv, degenerate=degenerate)


def rank_ensemble(
    X: np.ndarray, y: np.ndarray, seed: int = 0
) -> list[FeatureRanking]:
    """All five rankings in canonical method order."""
    ols_r, lasso_r, ridge_r = rank_by_linear_models(X, y, seed=seed)
    return [ols_r, lasso_r, ridge_r, rfe_rank(X, y), rf_importance(X, y, seed=seed)]


def select_features(X: np.ndarray, y: np.ndarray, k: int = 5, seed: int = 0) -> np.ndarray:
    """Indices of the aggregated top-k features."""
    return aggregate_rankings(rank_ensemble(X, y, seed=seed), k=k).selected


# ---------------------------------------------------------------------------
# CSV surfaces

RANKING_HEADER = (
    "feature",
    "ols_rank",
    "lasso_rank",
    "ridge_rank",
    "rfe_rank",
    "rf_rank",
    "mean_rank",
    "selected",
)


def write_ranking_csv(
    path: str | Path,
    feature_names: list[str],
    rankings: list[FeatureRanking],
    agg: AggregatedRanking,
) -> None:
    if len(rankings) != 5:
        raise ComputeError("ranking matrix expects the five canonical methods")
    selected = set(agg.selected.tolist())
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(RANKING_HEADER)
        for j, name in enumerate(feature_names):
            writer.writerow(
                [name]
                + [int(r.ranks[j]) for r in rankings]
                + [repr(float(agg.mean_rank[j])), int(j in selected)]
            )


def write_correlation_csv(
    path: str | Path, feature_names: list[str], report: CorrelationReport
) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(("feature", "r", "p"))
        for j, name in enumerate(feature_names):
            writer.writerow([name, repr(float(report.r[j])), repr(float(report.p[j]))])


def read_selection(path: str | Path, feature_names: list[str]) -> list[int]:
    """Selected feature indices from a ranking CSV."""
    path = Path(path)
    if not path.is_file():
        raise DataError(f"selection file not found: {path}")
    name_to_idx = {n: i for i, n in enumerate(feature_names)}
    selected = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(header) != RANKING_HEADER:
            raise DataError(f"{path}: not a ranking CSV")
        for row in reader:
            if not row:
                continue
            if row[0] not in name_to_idx:
                raise DataError(f"{path}: unknown feature {row[0]!r}")
            if row[-1] == "1":
                selected.append(name_to_idx[row[0]])
    if not selected:
        raise DataError(f"{path}: no selected features")
    return sorted(selected)
