"""End-to-end circle regression and circular AR models.

The three steps are: embed the angles and fit a circle on the parameter
hypersphere, regress the transformed variable ``Y`` on covariates (or on its
own lags), then map fitted values back to NNTS forecasts and validate them
through PIT uniformity tests.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import forecast, goftests, linmod, nnts, spherefit

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class Penalty:
    """Elastic-net settings; ``which`` picks ``lambda_min`` or ``lambda_1se``."""

    alpha: float = 0.5
    which: str = "min"
    seed: int = 0
    n_folds: int = 10

    def __post_init__(self):
        if self.which not in ("min", "1se"):
            raise ValueError(f"which must be 'min' or '1se', got {self.which!r}")


@dataclass
class FittedModel:
    """A fitted model with its in-sample forecasts and validation.

    ``r2cos`` is SSC/n for the fitted circle; ``r2cos_fitted`` is the mean
    squared cosine between each embedded angle and its forecast parameter
    vector. ``r2`` is the squared correlation of observed and fitted ``Y``
    and ``r2_uncentered`` is ``1 - RSS / sum(Y^2)``.
    """

    m: int
    circle: str
    fit: spherefit.GreatCircleFit | spherefit.SmallCircleFit | None
    beta: np.ndarray
    stderr: np.ndarray
    pvalues: np.ndarray
    names: tuple
    kind: str = "regression"
    ar_order: int = 0
    formula: str | None = None
    penalty: Penalty | None = None
    r2: float = float("nan")
    r2_uncentered: float = float("nan")
    r2cos_fitted: float = float("nan")
    n_used: int = 0
    validation: goftests.ValidationReport | None = field(default=None, repr=False)
    coeffs: np.ndarray | None = field(default=None, repr=False)
    penalty_info: dict | None = None

    @property
    def alpha(self) -> float | None:
        return getattr(self.fit, "alpha", None)

    @property
    def r2cos(self) -> float:
        return self.fit.r2cos if self.fit is not None else float("nan")

    def predict_coeffs(self, x, branch: str = "combined") -> np.ndarray:
        """Forecast coefficients ``(n, M+1)`` for covariate rows ``x``.

        For AR models a row holds the previous ``order`` values of ``Y``,
        most recent first. Small circles use ``branch`` (``"combined"``,
        ``"positive"`` or ``"negative"``); great circles ignore it.
        """
        if self.m == 0:
            n = len(np.atleast_2d(x)) if x is not None else 1
            return np.ones((n, 1), dtype=complex)
        x = np.atleast_2d(np.asarray(x, dtype=float))
        if x.shape[1] != len(self.beta):
            raise ValueError(f"expected {len(self.beta)} covariates per row, got {x.shape[1]}")
        linpred = x @ self.beta
        if self.circle == "great":
            return forecast.great_coeffs(self.fit, np.arctan(linpred))
        if branch == "combined":
            return forecast.small_combined_coeffs(self.fit, linpred)
        if branch in ("positive", "negative"):
            return forecast.small_coeffs(self.fit, linpred, 1 if branch == "positive" else -1)
        raise ValueError(f"unknown branch {branch!r}")

    def row(self) -> dict:
        """Flat summary mirroring one line of a results table."""
        v = self.validation
        out = {
            "m": self.m,
            "circle": self.circle if self.m else "uniform",
            "n": self.n_used,
            "names": list(self.names),
            "beta": _list(self.beta),
            "stderr": _list(self.stderr),
            "pvalues": _list(self.pvalues),
            "r2": _num(self.r2),
            "r2_uncentered": _num(self.r2_uncentered),
            "r2cos": _num(self.r2cos),
            "r2cos_fitted": _num(self.r2cos_fitted),
            "alpha": _num(self.alpha) if self.alpha is not None else None,
            "loglik": _num(v.loglik),
            "p_range": v.p_range,
            "p_kuiper": v.p_kuiper,
            "p_watson": v.p_watson,
            "p_range_text": goftests.bracket(v.p_range, "range"),
            "p_kuiper_text": goftests.bracket(v.p_kuiper, "kuiper"),
            "p_watson_text": goftests.bracket(v.p_watson, "watson"),
            "degenerate": bool(getattr(self.fit, "degenerate", False)),
        }
        if self.penalty_info is not None:
            out["penalty"] = self.penalty_info
        return out

    def to_dict(self) -> dict:
        """Everything needed to rebuild forecasts exactly."""
        d = {
            "m": self.m,
            "circle": self.circle,
            "kind": self.kind,
            "ar_order": self.ar_order,
            "formula": self.formula,
            "names": list(self.names),
            "beta": _list(self.beta),
            "stderr": _list(self.stderr),
            "pvalues": _list(self.pvalues),
        }
        if self.fit is not None:
            d["fit"] = {
                key: _num(getattr(self.fit, key)) if np.ndim(getattr(self.fit, key)) == 0 else getattr(self.fit, key).tolist()
                for key in ("a", "d", "b", "alpha", "ssc", "ssc_alpha", "n", "eigenvalues", "degenerate")
                if hasattr(self.fit, key)
            }
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "FittedModel":
        fit = None
        if d.get("fit") is not None:
            f = dict(d["fit"])
            for key in ("a", "d", "b", "eigenvalues"):
                if key in f:
                    f[key] = np.asarray(f[key], dtype=float)
            f["n"] = int(f["n"])
            f["degenerate"] = bool(f["degenerate"])
            fit = spherefit.SmallCircleFit(**f) if d["circle"] == "small" else spherefit.GreatCircleFit(**f)
        return cls(
            m=int(d["m"]),
            circle=d["circle"],
            fit=fit,
            beta=_array(d["beta"]),
            stderr=_array(d["stderr"]),
            pvalues=_array(d["pvalues"]),
            names=tuple(d["names"]),
            kind=d.get("kind", "regression"),
            ar_order=int(d.get("ar_order", 0)),
            formula=d.get("formula"),
        )


def _num(v):
    """JSON-safe float (NaN and infinities become None)."""
    if v is None:
        return None
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    v = float(v)
    return v if math.isfinite(v) else None


def _list(a) -> list:
    return [_num(v) for v in np.asarray(a, dtype=float).ravel()]


def _array(values) -> np.ndarray:
    return np.array([np.nan if v is None else v for v in values], dtype=float)


def _fit_circle(e: np.ndarray, circle: str):
    if circle == "great":
        return spherefit.fit_great_circle(e)
    if circle == "small":
        return spherefit.fit_small_circle(e)
    raise ValueError(f"circle must be 'great' or 'small', got {circle!r}")


def uniform_model(thetas) -> FittedModel:
    """The ``M = 0`` model: i.i.d. circular uniform."""
    thetas = np.asarray(thetas, dtype=float)
    coeffs = np.ones((len(thetas), 1), dtype=complex)
    return FittedModel(
        m=0,
        circle="great",
        fit=None,
        beta=np.array([]),
        stderr=np.array([]),
        pvalues=np.array([]),
        names=(),
        n_used=len(thetas),
        validation=goftests.validate(coeffs, thetas),
        coeffs=coeffs,
    )


def _branch_vectors(fit, circle: str, linpred: np.ndarray, branch: np.ndarray) -> np.ndarray:
    if circle == "great":
        return fit.point(np.arctan(linpred))
    return fit.point(forecast.small_branch_phi(linpred, branch))


def _to_coeffs(vecs: np.ndarray) -> np.ndarray:
    c = nnts.real_to_complex(vecs)
    return nnts.canonical_phase(c / np.linalg.norm(c, axis=1, keepdims=True))


def _finish(model: FittedModel, e: np.ndarray, thetas: np.ndarray, linpred: np.ndarray, branch: np.ndarray) -> FittedModel:
    vecs = _branch_vectors(model.fit, model.circle, linpred, branch)
    model.r2cos_fitted = float(np.mean(np.sum(e * vecs, axis=1) ** 2))
    model.coeffs = _to_coeffs(vecs)
    model.validation = goftests.validate(model.coeffs, thetas)
    model.n_used = len(thetas)
    return model


def in_sample(model: FittedModel, thetas, x=None):
    """Recompute in-sample forecasts from stored parameters.

    Returns ``(coeffs, thetas_used)``. Small-circle branches come from the
    observed angles; AR models drop the first ``ar_order`` observations.
    """
    thetas = np.asarray(thetas, dtype=float)
    if model.m == 0:
        return np.ones((len(thetas), 1), dtype=complex), thetas
    e = spherefit.embed(thetas, model.m)
    y, branch = spherefit.to_linear(e, model.fit)
    if model.kind == "ar":
        k = model.ar_order
        linpred = linmod.lag_matrix(y, k) @ model.beta
        return _to_coeffs(_branch_vectors(model.fit, model.circle, linpred, branch[k:])), thetas[k:]
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if x.shape != (len(thetas), len(model.beta)):
        raise ValueError(f"design of shape {x.shape} does not fit {len(thetas)} angles and {len(model.beta)} terms")
    return _to_coeffs(_branch_vectors(model.fit, model.circle, x @ model.beta, branch)), thetas


def _regress(x, y, names, penalty: Penalty | None):
    """Returns ``(beta, stderr, pvalues, r2, r2_uncentered, info)``."""
    if penalty is None:
        ols = linmod.ols_no_intercept(x, y, names)
        return ols.beta, ols.stderr, ols.pvalues, ols.r2, ols.r2_uncentered, None
    en = linmod.elastic_net(x, y, alpha=penalty.alpha, n_folds=penalty.n_folds, seed=penalty.seed)
    beta = en.coef_at(penalty.which)
    fitted = np.asarray(x) @ beta
    rss = float(np.sum((y - fitted) ** 2))
    r2 = float(np.corrcoef(fitted, y)[0, 1] ** 2) if np.std(fitted) > 0 else 0.0
    info = {
        "alpha": penalty.alpha,
        "lambda_min": en.lambda_min,
        "lambda_1se": en.lambda_1se,
        "selected": int(np.count_nonzero(beta)),
        "which": penalty.which,
    }
    nan = np.full(len(beta), np.nan)
    return beta, nan, nan, r2, 1.0 - rss / float(y @ y), info


def fit_regression(
    thetas,
    x,
    m: int,
    circle: str = "great",
    names: Sequence[str] | None = None,
    penalty: Penalty | None = None,
    formula: str | None = None,
) -> FittedModel:
    """Circle regression of angles ``thetas`` (radians) on design ``x``."""
    thetas = np.asarray(thetas, dtype=float)
    if m == 0:
        return uniform_model(thetas)
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if x.shape[0] != len(thetas):
        raise ValueError(f"design has {x.shape[0]} rows for {len(thetas)} angles")
    names = tuple(names) if names is not None else tuple(f"x{j + 1}" for j in range(x.shape[1]))
    e = spherefit.embed(thetas, m)
    fit = _fit_circle(e, circle)
    y, branch = spherefit.to_linear(e, fit)
    if not np.all(np.isfinite(y)):
        raise ValueError("an embedded angle is orthogonal to the circle axis; Y is undefined")
    beta, se, p, r2, r2u, info = _regress(x, y, names, penalty)
    model = FittedModel(
        m=m, circle=circle, fit=fit, beta=beta, stderr=se, pvalues=p, names=names,
        formula=formula, penalty=penalty, r2=r2, r2_uncentered=r2u, penalty_info=info,
    )
    return _finish(model, e, thetas, x @ beta, branch)


def fit_ar_model(thetas, m: int, order: int, circle: str = "great") -> FittedModel:
    """Zero-mean AR(``order``) on ``Y``; forecasts cover observations ``order..n-1``."""
    thetas = np.asarray(thetas, dtype=float)
    if m == 0:
        return uniform_model(thetas)
    e = spherefit.embed(thetas, m)
    fit = _fit_circle(e, circle)
    y, branch = spherefit.to_linear(e, fit)
    if not np.all(np.isfinite(y)):
        raise ValueError("an embedded angle is orthogonal to the circle axis; Y is undefined")
    ar = linmod.fit_ar(y, order)
    model = FittedModel(
        m=m, circle=circle, fit=fit, beta=ar.coef, stderr=ar.stderr, pvalues=ar.pvalues,
        names=ar.ols.names, kind="ar", ar_order=order, r2=ar.ols.r2, r2_uncentered=ar.ols.r2_uncentered,
    )
    lags = linmod.lag_matrix(y, order)
    return _finish(model, e[order:], thetas[order:], lags @ ar.coef, branch[order:])


def transformed_response(thetas, m: int, circle: str = "great") -> np.ndarray:
    """The linear variable ``Y`` for plots and diagnostics."""
    e = spherefit.embed(np.asarray(thetas, dtype=float), m)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", spherefit.DegenerateSpectrumWarning)
        y, _ = spherefit.to_linear(e, _fit_circle(e, circle))
    return y


def report(models: Sequence[FittedModel], meta: dict | None = None) -> dict:
    """JSON-ready report: one row per model plus the parameters to rebuild it.

    Range-test p-values are also Benjamini-Hochberg adjusted across the
    models with ``M >= 1``.
    """
    rows = [mdl.row() for mdl in models]
    idx = [i for i, mdl in enumerate(models) if mdl.m > 0]
    if idx:
        adj = goftests.bh_adjust([rows[i]["p_range"] for i in idx])
        for i, a in zip(idx, adj):
            rows[i]["p_range_bh"] = float(a)
    return {
        "schema_version": SCHEMA_VERSION,
        "meta": meta or {},
        "rows": rows,
        "models": [mdl.to_dict() for mdl in models],
    }
