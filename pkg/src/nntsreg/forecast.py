"""Predictive NNTS densities from fitted circles and linear models.

A linear predictor ``x^T beta`` is mapped to a rotation angle
``phi = arctan(x^T beta)`` and then to a point on the fitted circle, which
is read back as NNTS parameters. On a great circle ``phi`` and ``phi + pi``
give antipodal parameters and hence the same density. On a small circle they
do not, so each observation uses the branch given by the sign of ``e.a``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import nnts
from .spherefit import GreatCircleFit, SmallCircleFit

BRANCHES = ("positive", "negative", "combined", "great")
ANTIPODAL_TOL = 1e-12
RESULTANT_TOL = 1e-12


class ForecastError(ValueError):
    """A forecast cannot be formed or has no defined point prediction."""


@dataclass(frozen=True)
class DensityForecast:
    """NNTS predictive density for one covariate row.

    Attributes
    ----------
    params : NntsParams
        Canonical parameters of the forecast density.
    branch : str
        One of ``"positive"``, ``"negative"``, ``"combined"`` or ``"great"``.
    phi_hat : float
        Rotation angle on the circle. ``(-pi/2, pi/2)`` for great-circle and
        positive-branch forecasts, ``[pi/2, 3pi/2)`` on the negative branch
        and NaN for combined forecasts.
    covariates : np.ndarray
        The covariate row the forecast was made for.
    vector : np.ndarray
        Real point on the circle before phase canonicalization; branch
        combination works on these.
    """

    params: nnts.NntsParams
    branch: str
    phi_hat: float
    covariates: np.ndarray = field(repr=False)
    vector: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.branch not in BRANCHES:
            raise ValueError(f"unknown branch {self.branch!r}")


def predict_phi(beta_hat, x) -> float:
    """Rotation angle ``arctan(x^T beta)`` in ``(-pi/2, pi/2)``."""
    beta_hat = np.atleast_1d(np.asarray(beta_hat, dtype=float))
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if beta_hat.shape != x.shape:
        raise ValueError(f"covariates of length {x.size} do not match {beta_hat.size} coefficients")
    return float(np.arctan(x @ beta_hat))


def _make(vec: np.ndarray, branch: str, phi: float, x) -> DensityForecast:
    vec = np.asarray(vec, dtype=float)
    c = nnts.real_to_complex(vec)
    # orthonormal combinations are unit norm up to rounding
    params = nnts.NntsParams.from_complex(c / np.linalg.norm(c))
    cov = np.atleast_1d(np.asarray(x if x is not None else [], dtype=float)).copy()
    return DensityForecast(params=params, branch=branch, phi_hat=float(phi), covariates=cov, vector=vec)


def forecast_great(fit: GreatCircleFit, phi: float, covariates=None) -> DensityForecast:
    """Forecast at ``a cos(phi) + d sin(phi)`` on a great circle."""
    return _make(fit.point(phi), "great", phi, covariates)


def small_branch_phi(linpred, branch_sign):
    """``arctan(x^T beta)``, shifted by ``pi`` where ``branch_sign <= 0``."""
    phi = np.arctan(np.asarray(linpred, dtype=float))
    return np.where(np.asarray(branch_sign) > 0, phi, phi + np.pi)


def forecast_small(fit: SmallCircleFit, x, beta_hat, branch_sign: int) -> DensityForecast:
    """Forecast on one branch of a small circle.

    ``branch_sign > 0`` uses ``phi = arctan(x^T beta)``; otherwise ``phi + pi``.
    """
    phi = predict_phi(beta_hat, x)
    if branch_sign <= 0:
        phi += np.pi
    branch = "positive" if branch_sign > 0 else "negative"
    return _make(fit.point(phi), branch, phi, x)


def forecast_small_combined(fit: SmallCircleFit, x, beta_hat) -> DensityForecast:
    """Single forecast for new covariates, where no branch sign is observed."""
    return combine_branches(forecast_small(fit, x, beta_hat, 1), forecast_small(fit, x, beta_hat, -1))


def combine_branches(f_pos: DensityForecast, f_neg: DensityForecast) -> DensityForecast:
    """Normalized resultant of two branch forecasts."""
    if f_pos.vector.shape != f_neg.vector.shape:
        raise ValueError("forecasts come from circles of different dimension")
    if not np.array_equal(f_pos.covariates, f_neg.covariates):
        raise ValueError("forecasts are for different covariates")
    s = f_pos.vector + f_neg.vector
    norm = np.linalg.norm(s)
    if norm < ANTIPODAL_TOL:
        raise ForecastError("branch parameter vectors are antipodal; their resultant is undefined")
    return _make(s / norm, "combined", np.nan, f_pos.covariates)


def point_predict(forecast: DensityForecast | nnts.NntsParams) -> float:
    """Mean direction of the forecast density, in ``[0, 2pi)``."""
    params = getattr(forecast, "params", forecast)
    z = nnts.first_trig_moment(params)
    if abs(z) < RESULTANT_TOL:
        raise ForecastError("forecast density has zero mean resultant length; no preferred direction")
    return float(np.mod(np.angle(z), nnts.TWO_PI))


# Vectorized forms returning complex coefficient arrays (n, M+1).


def _rows_to_coeffs(vecs: np.ndarray) -> np.ndarray:
    c = nnts.real_to_complex(vecs)
    c = c / np.linalg.norm(c, axis=-1, keepdims=True)
    return nnts.canonical_phase(c)


def great_coeffs(fit: GreatCircleFit, phis) -> np.ndarray:
    return _rows_to_coeffs(fit.point(np.atleast_1d(phis)))


def small_coeffs(fit: SmallCircleFit, linpred, branch_sign) -> np.ndarray:
    """Per-row small-circle forecasts; ``branch_sign`` broadcasts against ``linpred``."""
    phis = small_branch_phi(np.atleast_1d(linpred), branch_sign)
    return _rows_to_coeffs(fit.point(phis))


def small_combined_coeffs(fit: SmallCircleFit, linpred) -> np.ndarray:
    linpred = np.atleast_1d(np.asarray(linpred, dtype=float))
    phi = np.arctan(linpred)
    s = fit.point(phi) + fit.point(phi + np.pi)
    norm = np.linalg.norm(s, axis=-1, keepdims=True)
    if np.any(norm < ANTIPODAL_TOL):
        raise ForecastError("branch parameter vectors are antipodal; their resultant is undefined")
    return _rows_to_coeffs(s / norm)


def batch_point_predict(coeffs: np.ndarray) -> np.ndarray:
    z = nnts.batch_first_trig_moment(coeffs)
    if np.any(np.abs(z) < RESULTANT_TOL):
        raise ForecastError("a forecast density has zero mean resultant length")
    return np.mod(np.angle(z), nnts.TWO_PI)


def branch_mixture_moment(fit: SmallCircleFit, linpred) -> np.ndarray:
    """First trigonometric moment of the equal mixture of both branch densities.

    Unlike the normalized resultant of the parameter vectors, which is
    always ``b`` and so ignores the covariates, the mixture keeps the
    covariate dependence of the two branches.
    """
    linpred = np.atleast_1d(np.asarray(linpred, dtype=float))
    pos = nnts.batch_first_trig_moment(small_coeffs(fit, linpred, 1))
    neg = nnts.batch_first_trig_moment(small_coeffs(fit, linpred, -1))
    return 0.5 * (pos + neg)


def mean_resultant_length(coeffs: np.ndarray) -> np.ndarray:
    """Mean resultant length per row; circular variance is one minus this."""
    return np.abs(nnts.batch_first_trig_moment(coeffs))
