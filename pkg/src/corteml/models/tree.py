"""CART decision-tree classifier.

Greedy impurity minimization with gini or entropy, thresholds at the
midpoints between consecutive distinct sorted values. Ties go to the
lowest feature index, then the lowest threshold; leaves predict the
majority class with ties to the lowest label. max_features: auto (all
features), sqrt, or log2 (sampled without replacement, seeded).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import ComputeError

LEAF = -1


@dataclass
class TreeNode:
    feature: int  # LEAF for leaves
    threshold: float
    left: int
    right: int
    counts: np.ndarray


@dataclass
class TreeModel:
    criterion: str
    min_samples_leaf: int
    min_samples_split: int
    max_features: str
    seed: int
    n_classes: int
    nodes: list[TreeNode] = field(default_factory=list)


def _impurity(counts: np.ndarray, criterion: str) -> float:
    n = counts.sum()
    if n == 0:
        return 0.0
    p = counts / n
    if criterion == "gini":
        return float(1.0 - (p**2).sum())
    nz = p[p > 0]
    return float(-(nz * np.log2(nz)).sum())


def _impurity_rows(counts: np.ndarray, totals: np.ndarray, criterion: str) -> np.ndarray:
    """Impurity per row of a (m, K) count matrix with row sums `totals`."""
    with np.errstate(divide="ignore", invalid="ignore"):
        p = counts / totals[:, None]
        if criterion == "gini":
            return 1.0 - (p**2).sum(axis=1)
        logp = np.where(p > 0, np.log2(np.where(p > 0, p, 1.0)), 0.0)
        return -(p * logp).sum(axis=1)


def _n_features_to_sample(max_features: str, p: int) -> int:
    if max_features == "auto":
        return p
    if max_features == "sqrt":
        return max(1, int(math.sqrt(p)))
    if max_features == "log2":
        return max(1, int(math.log2(p)))
    raise ComputeError(f"unknown max_features {max_features!r}")


def _best_split(X, y_oh, feature_ids, min_leaf, criterion):
    """Best (decrease, feature, threshold) over the candidate features.

    Scans features in ascending order and thresholds in ascending order
    with strict improvement, which realizes the documented tie rules.
    """
    n = X.shape[0]
    total = y_oh.sum(axis=0)
    parent = _impurity(total, criterion)
    best = (0.0, -1, 0.0)
    for f in feature_ids:
        order = np.argsort(X[:, f], kind="stable")
        vals = X[order, f]
        cum = np.cumsum(y_oh[order], axis=0)  # cum[i] = counts of first i+1
        left_n = np.arange(1, n + 1, dtype=np.float64)
        splittable = (
            (vals[1:] > vals[:-1])
            & (left_n[:-1] >= min_leaf)
            & ((n - left_n[:-1]) >= min_leaf)
        )
        if not splittable.any():
            continue
        left_counts = cum[:-1]
        right_counts = total[None, :] - left_counts
        imp_l = _impurity_rows(left_counts, left_n[:-1], criterion)
        imp_r = _impurity_rows(right_counts, n - left_n[:-1], criterion)
        decrease = parent - (left_n[:-1] * imp_l + (n - left_n[:-1]) * imp_r) / n
        decrease = np.where(splittable, decrease, -np.inf)
        pos = int(np.argmax(decrease))
        if decrease[pos] > best[0]:
            best = (float(decrease[pos]), f, float((vals[pos] + vals[pos + 1]) / 2.0))
    return best


def tree_fit(
    X: np.ndarray,
    y: np.ndarray,
    criterion: str = "gini",
    min_samples_leaf: int = 1,
    min_samples_split: int = 2,
    max_features: str = "auto",
    seed: int = 0,
    n_classes: int | None = None,
) -> TreeModel:
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if X.ndim != 2 or len(X) == 0:
        raise ComputeError("tree_fit requires a non-empty 2-D X")
    if len(y) != len(X):
        raise ComputeError("X and y length mismatch")
    if y.min() < 0:
        raise ComputeError("class labels must be non-negative integers")
    if criterion not in ("gini", "entropy"):
        raise ComputeError(f"unknown criterion {criterion!r}")
    k = n_classes if n_classes is not None else int(y.max()) + 1
    p = X.shape[1]
    m = _n_features_to_sample(max_features, p)
    rng = np.random.default_rng(seed) if m < p else None
    y_oh = np.zeros((len(y), k))
    y_oh[np.arange(len(y)), y] = 1.0

    model = TreeModel(
        criterion=criterion,
        min_samples_leaf=min_samples_leaf,
        min_samples_split=min_samples_split,
        max_features=max_features,
        seed=seed,
        n_classes=k,
    )

    def build(idx: np.ndarray) -> int:
        counts = y_oh[idx].sum(axis=0)
        node_id = len(model.nodes)
        model.nodes.append(TreeNode(LEAF, 0.0, -1, -1, counts))
        n_node = len(idx)
        if (
            n_node < min_samples_split
            or n_node < 2 * min_samples_leaf
            or _impurity(counts, criterion) == 0.0
        ):
            return node_id
        if rng is None:
            feature_ids = range(p)
        else:
            feature_ids = np.sort(rng.choice(p, size=m, replace=False))
        decrease, feat, thr = _best_split(
            X[idx], y_oh[idx], feature_ids, min_samples_leaf, criterion
        )
        if feat < 0 or decrease <= 0.0:
            return node_id
        mask = X[idx, feat] <= thr
        left_id = build(idx[mask])
        right_id = build(idx[~mask])
        node = model.nodes[node_id]
        node.feature = feat
        node.threshold = thr
        node.left = left_id
        node.right = right_id
        return node_id

    build(np.arange(len(y)))
    return model


def _leaf_for(model: TreeModel, x: np.ndarray) -> TreeNode:
    node = model.nodes[0]
    while node.feature != LEAF:
        node = model.nodes[node.left if x[node.feature] <= node.threshold else node.right]
    return node


def tree_predict(model: TreeModel, X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    out = np.empty(len(X), dtype=np.int64)
    for i, x in enumerate(X):
        out[i] = int(np.argmax(_leaf_for(model, x).counts))
    return out


def tree_decision(model: TreeModel, X: np.ndarray, positive: int = 1) -> np.ndarray:
    """Leaf-frequency of `positive`; the one-vs-rest score."""
    X = np.asarray(X, dtype=np.float64)
    out = np.empty(len(X))
    for i, x in enumerate(X):
        counts = _leaf_for(model, x).counts
        out[i] = counts[positive] / counts.sum()
    return out


def tree_depth(model: TreeModel) -> int:
    def depth(node_id: int) -> int:
        node = model.nodes[node_id]
        if node.feature == LEAF:
            return 0
        return 1 + max(depth(node.left), depth(node.right))

    return depth(0)
