"""Linear models for the transformed response.

No-intercept least squares with t inference, an elastic-net path fitted by
coordinate descent with seeded cross-validation, and zero-mean
autoregressions with ACF/PACF diagnostics.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import stats

MAX_CONDITION = 1e12


class DesignError(ValueError):
    """Singular, ill-conditioned, or malformed design matrix."""


def _as_design(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if x.ndim != 2:
        raise DesignError("design must be two-dimensional")
    if not np.all(np.isfinite(x)):
        raise DesignError("design has non-finite entries")
    return x


@dataclass(frozen=True)
class LinearFit:
    """No-intercept OLS fit.

    ``r2`` is the squared correlation between observed and fitted values;
    ``r2_uncentered`` is ``1 - RSS / sum(y^2)``, the usual figure reported
    for regressions through the origin.
    """

    beta: np.ndarray
    stderr: np.ndarray
    tvalues: np.ndarray
    pvalues: np.ndarray
    r2: float
    r2_uncentered: float
    residuals: np.ndarray = field(repr=False)
    fitted: np.ndarray = field(repr=False)
    df_resid: int
    names: tuple = ()


def ols_no_intercept(x, y, names: Sequence[str] | None = None) -> LinearFit:
    """Least squares without an intercept and two-sided t-tests on ``n - p`` df."""
    X = _as_design(x)
    y = np.asarray(y, dtype=float).ravel()
    n, p = X.shape
    if len(y) != n:
        raise DesignError(f"{n} design rows but {len(y)} responses")
    if not np.all(np.isfinite(y)):
        raise DesignError("response has non-finite entries")
    if n <= p:
        raise DesignError(f"need more observations ({n}) than columns ({p})")
    cond = np.linalg.cond(X)
    if not np.isfinite(cond) or cond**2 > MAX_CONDITION:
        raise DesignError(f"design is singular or ill-conditioned (cond(X'X) ~ {cond**2:.3g})")
    beta, *_ = np.linalg.lstsq(X, y, rcond=None)
    fitted = X @ beta
    resid = y - fitted
    df = n - p
    sigma2 = resid @ resid / df
    xtx_inv = np.linalg.inv(X.T @ X)
    se = np.sqrt(sigma2 * np.diag(xtx_inv))
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(se > 0, beta / se, np.copysign(np.inf, beta))
    pv = 2.0 * stats.t.sf(np.abs(t), df)
    if np.std(fitted) > 0 and np.std(y) > 0:
        r2 = float(np.corrcoef(fitted, y)[0, 1] ** 2)
    else:
        r2 = 0.0
    sy = y @ y
    r2u = float(1.0 - resid @ resid / sy) if sy > 0 else 0.0
    if names is None:
        names = [f"x{j + 1}" for j in range(p)]
    return LinearFit(
        beta=beta,
        stderr=se,
        tvalues=t,
        pvalues=pv,
        r2=r2,
        r2_uncentered=r2u,
        residuals=resid,
        fitted=fitted,
        df_resid=df,
        names=tuple(names),
    )


# --- elastic net -----------------------------------------------------------


def _soft(z, g):
    return np.sign(z) * np.maximum(np.abs(z) - g, 0.0)


def _cd_solve(X, y, lam, alpha, beta0, tol=1e-12, max_iter=100_000):
    """Coordinate descent for ``(1/2n)|y - Xb|^2 + lam (alpha|b|_1 + (1-alpha)/2 |b|^2)``."""
    n, p = X.shape
    beta = beta0.copy()
    col_sq = np.sum(X**2, axis=0) / n
    r = y - X @ beta
    l1 = lam * alpha
    l2 = lam * (1.0 - alpha)
    for _ in range(max_iter):
        max_step = 0.0
        for j in range(p):
            old = beta[j]
            rho = X[:, j] @ r / n + col_sq[j] * old
            new = _soft(rho, l1) / (col_sq[j] + l2)
            if new != old:
                r -= X[:, j] * (new - old)
                beta[j] = new
                max_step = max(max_step, abs(new - old) * np.sqrt(col_sq[j]))
        if max_step < tol:
            break
    return beta


def _scales(X):
    # columns are scaled, not centred: the model has no intercept
    s = np.sqrt(np.mean(X**2, axis=0))
    if np.any(s == 0):
        raise DesignError("design has an all-zero column")
    return s


def lambda_max(x, y, alpha: float) -> float:
    """Smallest penalty giving an all-zero solution (standardized scale)."""
    X = _as_design(x)
    y = np.asarray(y, dtype=float)
    Xs = X / _scales(X)
    return float(np.max(np.abs(Xs.T @ y)) / (len(y) * max(alpha, 1e-3)))


def enet_path(x, y, alpha: float, lambdas) -> np.ndarray:
    """Coefficients (original scale) along a decreasing penalty grid, warm-started."""
    X = _as_design(x)
    y = np.asarray(y, dtype=float)
    s = _scales(X)
    Xs = X / s
    lambdas = np.asarray(lambdas, dtype=float)
    order = np.argsort(-lambdas)
    coefs = np.zeros((len(lambdas), X.shape[1]))
    beta = np.zeros(X.shape[1])
    for i in order:
        beta = _cd_solve(Xs, y, lambdas[i], alpha, beta)
        coefs[i] = beta / s
    return coefs


def kkt_violation(x, y, coef, lam: float, alpha: float) -> float:
    """Largest violation of the elastic-net optimality conditions.

    Evaluated on the standardized scale used by the solver.
    """
    X = _as_design(x)
    y = np.asarray(y, dtype=float)
    s = _scales(X)
    Xs = X / s
    b = np.asarray(coef) * s
    n = len(y)
    grad = Xs.T @ (y - Xs @ b) / n - lam * (1 - alpha) * b
    l1 = lam * alpha
    active = b != 0
    worst = 0.0
    if np.any(active):
        worst = np.max(np.abs(grad[active] - l1 * np.sign(b[active])))
    if np.any(~active):
        worst = max(worst, np.max(np.maximum(np.abs(grad[~active]) - l1, 0.0)))
    return float(worst)


@dataclass(frozen=True)
class ElasticNetFit:
    """Penalized path with cross-validated penalty choices."""

    lambdas: np.ndarray
    coefs: np.ndarray
    n_selected: np.ndarray
    cv_mean: np.ndarray
    cv_se: np.ndarray
    lambda_min: float
    lambda_1se: float
    alpha: float

    def coef_at(self, which: str = "min") -> np.ndarray:
        lam = {"min": self.lambda_min, "1se": self.lambda_1se}[which]
        return self.coefs[int(np.flatnonzero(self.lambdas == lam)[0])]


def elastic_net(
    x,
    y,
    alpha: float = 0.5,
    lambdas=None,
    n_folds: int = 10,
    seed: int = 0,
    n_lambdas: int = 100,
    min_ratio: float = 1e-3,
) -> ElasticNetFit:
    """Elastic-net path with ``n_folds``-fold cross-validation.

    Columns are rescaled internally to unit root mean square and the
    coefficients are reported on the original scale. Without an explicit
    grid, ``n_lambdas`` log-spaced values run from :func:`lambda_max` down
    by ``min_ratio``. ``lambda_1se`` is the largest penalty whose CV error
    is within one standard error of the minimum.
    """
    X = _as_design(x)
    y = np.asarray(y, dtype=float).ravel()
    if not np.all(np.isfinite(y)):
        raise DesignError("response has non-finite entries")
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must lie in [0, 1]")
    if lambdas is None:
        top = lambda_max(X, y, alpha)
        lambdas = np.geomspace(top, top * min_ratio, n_lambdas)
    lambdas = np.sort(np.asarray(lambdas, dtype=float))[::-1]
    if lambdas.size == 0:
        raise ValueError("empty penalty grid")
    if np.any(lambdas < 0) or not np.all(np.isfinite(lambdas)):
        raise ValueError("penalties must be finite and nonnegative")
    n = len(y)
    n_folds = min(n_folds, n)
    rng = np.random.default_rng(seed)
    folds = rng.permutation(np.arange(n) % n_folds)
    errs = np.empty((n_folds, len(lambdas)))
    for f in range(n_folds):
        test = folds == f
        path = enet_path(X[~test], y[~test], alpha, lambdas)
        pred = X[test] @ path.T
        errs[f] = np.mean((y[test][:, None] - pred) ** 2, axis=0)
    cv_mean = errs.mean(axis=0)
    cv_se = errs.std(axis=0, ddof=1) / np.sqrt(n_folds) if n_folds > 1 else np.zeros_like(cv_mean)
    i_min = int(np.argmin(cv_mean))
    within = np.flatnonzero(cv_mean <= cv_mean[i_min] + cv_se[i_min])
    i_1se = int(within[np.argmax(lambdas[within])])
    coefs = enet_path(X, y, alpha, lambdas)
    return ElasticNetFit(
        lambdas=lambdas,
        coefs=coefs,
        n_selected=np.count_nonzero(coefs, axis=1),
        cv_mean=cv_mean,
        cv_se=cv_se,
        lambda_min=float(lambdas[i_min]),
        lambda_1se=float(lambdas[i_1se]),
        alpha=alpha,
    )


# --- autoregression ----------------------------------------------------------


def lag_matrix(y, order: int) -> np.ndarray:
    """Rows ``(y[t-1], ..., y[t-order])`` for ``t = order .. n-1``."""
    y = np.asarray(y, dtype=float)
    n = len(y)
    return np.column_stack([y[order - j : n - j] for j in range(1, order + 1)])


@dataclass(frozen=True)
class ARFit:
    """Zero-mean AR(p) by conditional least squares on the lag design."""

    order: int
    ols: LinearFit

    @property
    def coef(self) -> np.ndarray:
        return self.ols.beta

    @property
    def stderr(self) -> np.ndarray:
        return self.ols.stderr

    @property
    def pvalues(self) -> np.ndarray:
        return self.ols.pvalues

    @property
    def residuals(self) -> np.ndarray:
        return self.ols.residuals

    @property
    def fitted(self) -> np.ndarray:
        return self.ols.fitted


def fit_ar(y, order: int) -> ARFit:
    """Fit ``y_t = sum_j phi_j y_{t-j} + e_t``; the first ``order`` points only serve as lags."""
    y = np.asarray(y, dtype=float)
    if order < 1:
        raise ValueError("order must be positive")
    if len(y) <= order + 1:
        raise DesignError(f"series of length {len(y)} too short for AR({order})")
    names = [f"ar{j}" for j in range(1, order + 1)]
    return ARFit(order=order, ols=ols_no_intercept(lag_matrix(y, order), y[order:], names))


def acf(y, max_lag: int) -> np.ndarray:
    """Sample autocorrelations for lags ``0..max_lag`` (divisor ``n``)."""
    y = np.asarray(y, dtype=float)
    z = y - y.mean()
    c0 = z @ z
    if c0 == 0:
        raise ValueError("constant series has no autocorrelation")
    n = len(y)
    return np.array([z[: n - k] @ z[k:] / c0 for k in range(max_lag + 1)])


def pacf_from_acf(r: np.ndarray) -> np.ndarray:
    """Durbin-Levinson recursion; ``out[0] = 1`` and ``out[k]`` is the lag-k PACF."""
    max_lag = len(r) - 1
    out = np.ones(max_lag + 1)
    phi = np.zeros(max_lag + 1)
    v = 1.0
    for k in range(1, max_lag + 1):
        a = (r[k] - phi[1:k] @ r[k - 1 : 0 : -1]) / v
        prev = phi[1:k].copy()
        phi[1:k] = prev - a * prev[::-1]
        phi[k] = a
        v *= 1.0 - a * a
        out[k] = a
    return out


@dataclass(frozen=True)
class Correlogram:
    acf: np.ndarray
    pacf: np.ndarray
    band: float


def acf_pacf(y, max_lag: int) -> Correlogram:
    """ACF and PACF up to ``max_lag`` with the ``1.96/sqrt(n)`` white-noise band."""
    y = np.asarray(y, dtype=float)
    if max_lag < 1:
        raise ValueError("max_lag must be positive")
    if max_lag >= len(y) / 2:
        raise ValueError(f"max_lag {max_lag} must be below n/2 = {len(y) / 2}")
    r = acf(y, max_lag)
    return Correlogram(acf=r, pacf=pacf_from_acf(r), band=1.96 / np.sqrt(len(y)))
