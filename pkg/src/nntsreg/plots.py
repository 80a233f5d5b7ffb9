"""Standalone SVG figures: forecast densities, mean and variance curves,
correlograms and ``Y`` against a covariate.

SVG output is made reproducible by fixing matplotlib's hash salt and
omitting the creation date.
"""

from __future__ import annotations

import io
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from . import linmod, nnts  # noqa: E402

GRID_POINTS = 721
_RC = {"svg.hashsalt": "nntsreg", "svg.fonttype": "none", "path.simplify": False}


def density_curve(coeffs, grid: int = GRID_POINTS):
    """``(theta, f)`` on a closed grid over ``[0, 2pi]`` for one parameter row."""
    theta = np.linspace(0.0, nnts.TWO_PI, grid)
    c = np.broadcast_to(np.asarray(coeffs, dtype=complex), (grid, np.size(coeffs)))
    return theta, nnts.batch_density(c, theta)


def _svg(fig) -> str:
    buf = io.StringIO()
    with plt.rc_context(_RC):
        fig.savefig(buf, format="svg", metadata={"Date": None})
    plt.close(fig)
    return buf.getvalue()


def density_figure(coeffs: np.ndarray, labels: Sequence[str], title: str = "") -> str:
    """Overlayed forecast densities, one per row of ``coeffs``."""
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(6, 4))
        for c, lab in zip(np.atleast_2d(coeffs), labels):
            t, f = density_curve(c)
            ax.plot(t, f, label=lab, lw=1.2)
        ax.set_xlim(0, nnts.TWO_PI)
        ax.set_xticks(np.arange(5) * np.pi / 2, ["0", "π/2", "π", "3π/2", "2π"])
        ax.set_xlabel("angle (rad)")
        ax.set_ylabel("density")
        ax.set_ylim(bottom=0)
        if title:
            ax.set_title(title)
        if len(labels) > 1:
            ax.legend(fontsize=7)
        fig.tight_layout()
    return _svg(fig)


def mean_variance_figure(covariate: np.ndarray, coeffs: np.ndarray, xlabel: str, mixture=None) -> str:
    """Mean direction and circular variance of the forecasts against a covariate.

    ``mixture`` optionally holds first trigonometric moments of a second
    forecast family (e.g. the two-branch mixture), drawn dashed.
    """
    curves = [("forecast", nnts.batch_first_trig_moment(coeffs), "-")]
    if mixture is not None:
        curves.append(("branch mixture", np.asarray(mixture), "--"))
    with plt.rc_context(_RC):
        fig, (a1, a2) = plt.subplots(1, 2, figsize=(8, 3.5))
        for label, z, ls in curves:
            a1.plot(covariate, np.mod(np.angle(z), nnts.TWO_PI), ls, lw=1.2, label=label)
            a2.plot(covariate, 1.0 - np.abs(z), ls, lw=1.2, label=label)
        a1.set_ylim(0, nnts.TWO_PI)
        a1.set_xlabel(xlabel)
        a1.set_ylabel("mean direction (rad)")
        if len(curves) > 1:
            a1.legend(fontsize=7)
        a2.set_ylim(0, 1)
        a2.set_xlabel(xlabel)
        a2.set_ylabel("circular variance")
        fig.tight_layout()
    return _svg(fig)


def correlogram_figure(y: np.ndarray, max_lag: int) -> str:
    """ACF and PACF stem plots with white-noise bands."""
    cg = linmod.acf_pacf(y, max_lag)
    lags = np.arange(max_lag + 1)
    with plt.rc_context(_RC):
        fig, axes = plt.subplots(1, 2, figsize=(8, 3.5))
        for ax, vals, name in ((axes[0], cg.acf, "ACF"), (axes[1], cg.pacf[1:], "PACF")):
            x = lags if name == "ACF" else lags[1:]
            ax.vlines(x, 0, vals, lw=1.2)
            ax.plot(x, vals, "o", ms=3)
            for b in (cg.band, -cg.band):
                ax.axhline(b, ls="--", lw=0.8, color="grey")
            ax.axhline(0, lw=0.6, color="black")
            ax.set_xlabel("lag")
            ax.set_ylabel(name)
        fig.tight_layout()
    return _svg(fig)


def scatter_figure(x: np.ndarray, y: np.ndarray, xlabel: str) -> str:
    """Transformed variable ``Y`` against a covariate."""
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(5, 4))
        ax.plot(x, y, "o", ms=4)
        ax.axhline(0, lw=0.6, color="black")
        ax.set_xlabel(xlabel)
        ax.set_ylabel("Y")
        fig.tight_layout()
    return _svg(fig)
