"""L2-regularized logistic regression by full-batch gradient descent.

Penalty is (1/(2C)) ||w||^2 with the intercept left unpenalized.
Backtracking line search keeps the loss nonincreasing; convergence is
declared when the gradient infinity-norm drops below 1e-6.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ComputeError

_GRAD_TOL = 1e-6
_ARMIJO_C = 1e-4
_BACKTRACK = 0.5


@dataclass
class LogisticModel:
    weights: np.ndarray
    intercept: float
    C: float
    max_iter: int
    converged: bool
    n_iter: int
    loss_trace: np.ndarray = field(repr=False, default=None)


def _loss_grad(theta, X1, y, C):
    """Penalized NLL and gradient; theta = [intercept, w], y in {0,1}."""
    z = X1 @ theta
    # log(1 + exp(-|z|)) formulation is overflow-safe
    nll = float(np.sum(np.logaddexp(0.0, z) - y * z))
    w = theta[1:]
    loss = nll + 0.5 / C * float(w @ w)
    prob = 1.0 / (1.0 + np.exp(-z))
    grad = X1.T @ (prob - y)
    grad[1:] += w / C
    return loss, grad


def logistic_fit(X: np.ndarray, y: np.ndarray, C: float = 1.0, max_iter: int = 100) -> LogisticModel:
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if set(np.unique(y)) - {0.0, 1.0}:
        raise ComputeError("logistic_fit expects binary labels in {0, 1}")
    if len(np.unique(y)) < 2:
        raise ComputeError("degenerate labels: both classes must be present")
    if C <= 0:
        raise ComputeError(f"C must be positive, got {C}")
    n = len(y)
    X1 = np.column_stack([np.ones(n), X])
    theta = np.zeros(X1.shape[1])
    loss, grad = _loss_grad(theta, X1, y, C)
    trace = [loss]
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        gnorm = float(np.abs(grad).max())
        if gnorm < _GRAD_TOL:
            converged = True
            it -= 1
            break
        step = 1.0
        g2 = float(grad @ grad)
        while True:
            candidate = theta - step * grad
            new_loss, new_grad = _loss_grad(candidate, X1, y, C)
            if new_loss <= loss - _ARMIJO_C * step * g2 or step < 1e-16:
                break
            step *= _BACKTRACK
        theta, loss, grad = candidate, new_loss, new_grad
        trace.append(loss)
    else:
        converged = float(np.abs(grad).max()) < _GRAD_TOL
    return LogisticModel(
        weights=theta[1:].copy(),
        intercept=float(theta[0]),
        C=C,
        max_iter=max_iter,
        converged=converged,
        n_iter=it,
        loss_trace=np.asarray(trace),
    )


def logistic_predict(model: LogisticModel, X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(labels in {0,1}, probabilities of class 1)."""
    X = np.asarray(X, dtype=np.float64)
    z = model.intercept + X @ model.weights
    prob = 1.0 / (1.0 + np.exp(-z))
    return (prob > 0.5).astype(np.int64), prob


def logistic_decision(model: LogisticModel, X: np.ndarray) -> np.ndarray:
    """Signed logit; used as the one-vs-rest score."""
    X = np.asarray(X, dtype=np.float64)
    return model.intercept + X @ model.weights
