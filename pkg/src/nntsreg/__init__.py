"""Circular regression and time-series models with NNTS predictive densities."""

__version__ = "0.1.0"

from .nnts import NntsParams, cdf, density, first_trig_moment, loglik, sample
from .spherefit import embed, fit_great_circle, fit_small_circle, to_linear
from .linmod import acf_pacf, elastic_net, fit_ar, ols_no_intercept
from .forecast import DensityForecast, combine_branches, forecast_great, forecast_small, point_predict, predict_phi
from .goftests import bh_adjust, kuiper_test, pit_series, range_test, validate, watson_test
from .model import fit_ar_model, fit_regression

__all__ = [
    "NntsParams", "cdf", "density", "first_trig_moment", "loglik", "sample",
    "embed", "fit_great_circle", "fit_small_circle", "to_linear",
    "acf_pacf", "elastic_net", "fit_ar", "ols_no_intercept",
    "DensityForecast", "combine_branches", "forecast_great", "forecast_small", "point_predict", "predict_phi",
    "bh_adjust", "kuiper_test", "pit_series", "range_test", "validate", "watson_test",
    "fit_ar_model", "fit_regression",
]
