"""Soft-margin SVM trained by SMO on the dual.

Working-set selection is the maximal violating pair; each pair is
solved analytically and clipped to the box. Kernels: linear <u,v> and
polynomial (gamma <u,v> + 1)^degree (gamma is a no-op for linear).
The +1 offset makes every degree-d kernel strictly richer than
degree-(d-1), which grid search over the degree presupposes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from ..errors import ComputeError

KKT_TOL = 1e-3
_EQ_TOL = 1e-6
_SV_EPS = 1e-10


def kernel_matrix(
    A: np.ndarray, B: np.ndarray, kernel: str, gamma: float, degree: int
) -> np.ndarray:
    G = np.asarray(A, dtype=np.float64) @ np.asarray(B, dtype=np.float64).T
    if kernel == "linear":
        return G
    if kernel == "poly":
        return (gamma * G + 1.0) ** degree
    raise ComputeError(f"unknown kernel {kernel!r}")


@njit(cache=True)
def _smo_core(K, y, C, tol, max_iter, sweep):  # pragma: no cover - compiled
    n = K.shape[0]
    alpha = np.zeros(n)
    f = np.zeros(n)
    max_sweeps = max_iter // sweep + 2
    obj_trace = np.empty(max_sweeps)
    n_obj = 0
    it = 0
    converged = False
    while it < max_iter:
        if it % sweep == 0:
            obj = 0.0
            for k in range(n):
                obj += alpha[k] - 0.5 * alpha[k] * y[k] * f[k]
            obj_trace[n_obj] = obj
            n_obj += 1
        # maximal violating pair
        m = -1e300
        M = 1e300
        i = -1
        j = -1
        for k in range(n):
            gk = y[k] - f[k]
            if ((y[k] > 0.0 and alpha[k] < C) or (y[k] < 0.0 and alpha[k] > 0.0)) and gk > m:
                m = gk
                i = k
            if ((y[k] > 0.0 and alpha[k] > 0.0) or (y[k] < 0.0 and alpha[k] < C)) and gk < M:
                M = gk
                j = k
        if i < 0 or j < 0 or m - M <= tol:
            converged = True
            break
        s = y[i] * y[j]
        if s > 0.0:
            gap = alpha[i] + alpha[j]
            L = max(0.0, gap - C)
            H = min(C, gap)
        else:
            gap = alpha[j] - alpha[i]
            L = max(0.0, gap)
            H = min(C, C + gap)
        eta = K[i, i] + K[j, j] - 2.0 * K[i, j]
        if eta < 1e-12:
            eta = 1e-12
        e1 = f[i] - y[i]
        e2 = f[j] - y[j]
        aj = alpha[j] + y[j] * (e1 - e2) / eta
        if aj < L:
            aj = L
        elif aj > H:
            aj = H
        dj = aj - alpha[j]
        if abs(dj) < 1e-15:
            # pair cannot move; treat current point as converged at tol
            converged = m - M <= tol
            break
        ai = alpha[i] - s * dj
        # snap to the exact bounds so rounding slivers cannot strand a
        # variable formally inside the working sets
        snap = 1e-10 * C
        if aj < snap:
            aj = 0.0
        elif aj > C - snap:
            aj = C
        if ai < snap:
            ai = 0.0
        elif ai > C - snap:
            ai = C
        dj = aj - alpha[j]
        di = ai - alpha[i]
        ui = di * y[i]
        uj = dj * y[j]
        for k in range(n):
            f[k] += ui * K[k, i] + uj * K[k, j]
        alpha[i] = ai
        alpha[j] = aj
        it += 1
    # final objective and violation bounds
    obj = 0.0
    for k in range(n):
        obj += alpha[k] - 0.5 * alpha[k] * y[k] * f[k]
    obj_trace[n_obj] = obj
    n_obj += 1
    m = -1e300
    M = 1e300
    for k in range(n):
        gk = y[k] - f[k]
        if (y[k] > 0.0 and alpha[k] < C) or (y[k] < 0.0 and alpha[k] > 0.0):
            if gk > m:
                m = gk
        if (y[k] > 0.0 and alpha[k] > 0.0) or (y[k] < 0.0 and alpha[k] < C):
            if gk < M:
                M = gk
    return alpha, f, it, obj_trace[:n_obj], converged, m, M


@dataclass
class SvmModel:
    kernel: str
    C: float
    gamma: float
    degree: int
    sv_X: np.ndarray
    sv_coef: np.ndarray  # alpha_i * y_i for the support vectors
    bias: float
    alpha: np.ndarray  # full training alpha (for the KKT invariants)
    train_y: np.ndarray
    n_iter: int
    dual_objective: float


def svm_fit(
    X: np.ndarray,
    y: np.ndarray,
    C: float,
    gamma: float = 0.1,
    kernel: str = "linear",
    degree: int = 3,
    tol: float = KKT_TOL,
) -> SvmModel:
    """Train on labels in {-1, +1}; raises if SMO cannot converge."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    labels = set(np.unique(y))
    if labels - {-1.0, 1.0}:
        raise ComputeError("svm_fit expects labels in {-1, +1}")
    if len(labels) < 2:
        raise ComputeError("degenerate labels: both classes must be present")
    if C <= 0:
        raise ComputeError(f"C must be positive, got {C}")
    n = len(y)
    K = np.ascontiguousarray(kernel_matrix(X, X, kernel, gamma, degree))
    max_iter = max(100_000, 200 * n)
    alpha, f, n_iter, obj_trace, converged, m, M = _smo_core(
        K, y, C, tol, max_iter, n
    )
    if not converged:
        raise ComputeError(f"SMO did not converge within {max_iter} pair updates")
    # dual objective must never decrease between sweeps
    scale = 1.0 + np.abs(obj_trace).max()
    if np.any(np.diff(obj_trace) < -1e-9 * scale):
        raise ComputeError("SMO dual objective decreased; solver invariant violated")

    free = (alpha > _SV_EPS) & (alpha < C - _SV_EPS)
    if free.any():
        bias = float(np.mean(y[free] - f[free]))
    else:
        # midpoint of the violation bounds keeps every KKT residual <= tol/2
        bias = float((m + M) / 2.0) if m > -1e299 and M < 1e299 else 0.0

    # post-conditions: box, equality constraint, KKT at tolerance
    if alpha.min() < -1e-12 or alpha.max() > C + 1e-12:
        raise ComputeError("alpha escaped the box constraint")
    if abs(float(alpha @ y)) > _EQ_TOL * max(1.0, C):
        raise ComputeError("sum alpha_i y_i deviates from 0 beyond tolerance")
    margins = y * (f + bias)
    viol = np.zeros(n)
    at_zero = alpha <= _SV_EPS
    at_c = alpha >= C - _SV_EPS
    viol[at_zero] = np.maximum(0.0, 1.0 - margins[at_zero])
    viol[at_c] = np.maximum(0.0, margins[at_c] - 1.0)
    viol[free] = np.abs(margins[free] - 1.0)
    if viol.max() > tol + 1e-9:
        raise ComputeError(f"KKT violation {viol.max():.2e} exceeds tolerance {tol}")

    sv = alpha > _SV_EPS
    return SvmModel(
        kernel=kernel,
        C=C,
        gamma=gamma,
        degree=degree,
        sv_X=X[sv].copy(),
        sv_coef=(alpha * y)[sv].copy(),
        bias=bias,
        alpha=alpha,
        train_y=y.copy(),
        n_iter=n_iter,
        dual_objective=float(obj_trace[-1]),
    )


def svm_decision(model: SvmModel, X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if len(model.sv_coef) == 0:
        return np.full(len(X), model.bias)
    K = kernel_matrix(X, model.sv_X, model.kernel, model.gamma, model.degree)
    return K @ model.sv_coef + model.bias


def svm_predict(model: SvmModel, X: np.ndarray) -> np.ndarray:
    """Labels in {-1, +1}; the 0 boundary maps to +1."""
    return np.where(svm_decision(model, X) >= 0.0, 1.0, -1.0)
