"""Multiple linear regression with the usual inference table.

QR-based least squares; per-coefficient standard errors from
sigma^2 (X'X)^-1, model F test, and the three assumption diagnostics
(Jarque-Bera, Breusch-Pagan, VIF).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .. import statmath
from ..errors import ComputeError

_RCOND = 1e-10


@dataclass
class OlsFit:
    intercept: float
    coef: np.ndarray
    intercept_se: float
    se: np.ndarray
    intercept_t: float
    t: np.ndarray
    intercept_p: float
    p: np.ndarray
    f_stat: float
    f_p: float
    r_squared: float
    mse: float
    mae: float
    residuals: np.ndarray
    n: int

    def predict(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != len(self.coef):
            raise ComputeError(
                f"predict expects n x {len(self.coef)} matrix, got {X.shape}"
            )
        return self.intercept + X @ self.coef


def ols_fit(X: np.ndarray, y: np.ndarray) -> OlsFit:
    """Fit y = b0 + X b by least squares with inference statistics.

    Requires n > p + 1 and a full-rank design (after the intercept
    column is added).
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if X.ndim != 2:
        raise ComputeError(f"X must be 2-D, got shape {X.shape}")
    n, p = X.shape
    if y.shape != (n,):
        raise ComputeError(f"y must have shape ({n},), got {y.shape}")
    if n <= p + 1:
        raise ComputeError(f"underdetermined: n={n} <= p+1={p + 1}")
    design = np.column_stack([np.ones(n), X])
    q, r = np.linalg.qr(design)
    diag = np.abs(np.diag(r))
    if diag.min() <= _RCOND * max(diag.max(), 1.0):
        raise ComputeError("singular design: X is rank deficient after adding intercept")
    beta = np.linalg.solve(r, q.T @ y)
    fitted = design @ beta
    resid = y - fitted
    rss = float(resid @ resid)
    dof = n - p - 1
    sigma2 = rss / dof
    # (X'X)^-1 = R^-1 R^-T
    r_inv = np.linalg.solve(r, np.eye(p + 1))
    xtx_inv = r_inv @ r_inv.T
    se_all = np.sqrt(sigma2 * np.diag(xtx_inv))
    with np.errstate(divide="ignore", invalid="ignore"):
        t_all = np.where(se_all > 0, beta / se_all, np.inf * np.sign(beta))
    p_all = np.array([statmath.two_sided_t_p(t, dof) for t in t_all])

    tss = float(((y - y.mean()) ** 2).sum())
    r2 = 1.0 - rss / tss if tss > 0 else 1.0
    if p == 0:
        f_stat, f_p = float("nan"), float("nan")
    elif r2 >= 1.0:
        f_stat, f_p = float("inf"), 0.0
    else:
        f_stat = (r2 / p) / ((1.0 - r2) / dof)
        f_p = 1.0 - statmath.f_cdf(f_stat, p, dof)
    return OlsFit(
        intercept=float(beta[0]),
        coef=beta[1:].copy(),
        intercept_se=float(se_all[0]),
        se=se_all[1:].copy(),
        intercept_t=float(t_all[0]),
        t=t_all[1:].copy(),
        intercept_p=float(p_all[0]),
        p=p_all[1:].copy(),
        f_stat=float(f_stat),
        f_p=float(f_p),
        r_squared=float(r2),
        mse=rss / n,
        mae=float(np.abs(resid).mean()),
        residuals=resid,
        n=n,
    )


@dataclass
class AssumptionReport:
    jarque_bera: float
    jarque_bera_p: float
    breusch_pagan: float
    breusch_pagan_p: float
    vif: np.ndarray
    vif_overflow: list[int] = field(default_factory=list)


def _aux_r_squared(X: np.ndarray, y: np.ndarray) -> float:
    """R^2 of an auxiliary regression (lstsq; tolerates collinearity)."""
    n = len(y)
    design = np.column_stack([np.ones(n), X])
    beta, _, _, _ = np.linalg.lstsq(design, y, rcond=None)
    resid = y - design @ beta
    tss = float(((y - y.mean()) ** 2).sum())
    if tss == 0:
        return 1.0
    return 1.0 - float(resid @ resid) / tss


def check_assumptions(fit: OlsFit, X: np.ndarray) -> AssumptionReport:
    """Residual normality (JB), homoscedasticity (BP), collinearity (VIF)."""
    X = np.asarray(X, dtype=np.float64)
    resid = fit.residuals
    n = len(resid)
    if X.shape[0] != n:
        raise ComputeError("X rows must match the fitted residuals")

    centered = resid - resid.mean()
    m2 = float((centered**2).mean())
    if m2 == 0:
        jb, jb_p = 0.0, 1.0
    else:
        skew = float((centered**3).mean()) / m2**1.5
        kurt = float((centered**4).mean()) / m2**2
        jb = n / 6.0 * (skew**2 + 0.25 * (kurt - 3.0) ** 2)
        jb_p = 1.0 - statmath.chi2_cdf(jb, 2.0)

    p = X.shape[1]
    r2_aux = _aux_r_squared(X, resid**2)
    bp = n * r2_aux
    bp_p = 1.0 - statmath.chi2_cdf(bp, float(p)) if p > 0 else 1.0

    vif = np.empty(p)
    overflow = []
    for j in range(p):
        others = np.delete(X, j, axis=1)
        if others.shape[1] == 0:
            vif[j] = 1.0
            continue
        r2_j = _aux_r_squared(others, X[:, j])
        if r2_j >= 1.0 - 1e-12:
            vif[j] = np.inf
            overflow.append(j)
        else:
            vif[j] = 1.0 / (1.0 - r2_j)
    return AssumptionReport(
        jarque_bera=float(jb),
        jarque_bera_p=float(jb_p),
        breusch_pagan=float(bp),
        breusch_pagan_p=float(bp_p),
        vif=vif,
        vif_overflow=overflow,
    )
