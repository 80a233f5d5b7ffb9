"""Circular uniformity tests for probability integral transforms.

All tests take PIT values ``u`` in ``[0, 1]`` (angles divided by 2pi) and
return ``(statistic, p_value)`` with continuous p-values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import mpmath
import numpy as np

from . import nnts

SERIES_TOL = 1e-12
SERIES_TERMS = 100
FLOAT_SAFE_LOG = math.log(1e3)


def _check_unit(u, min_n: int) -> np.ndarray:
    u = np.asarray(u, dtype=float).ravel()
    if u.size < min_n:
        raise ValueError(f"need at least {min_n} values, got {u.size}")
    if not np.all(np.isfinite(u)) or np.any(u < 0) or np.any(u > 1):
        raise ValueError("values must lie in [0, 1]")
    return u


def pit_series(forecasts, thetas) -> np.ndarray:
    """PIT values ``F_k(theta_k)`` for a sequence of density forecasts.

    ``forecasts`` may hold :class:`~nntsreg.forecast.DensityForecast`
    objects, :class:`~nntsreg.nnts.NntsParams`, or be a complex coefficient
    array ``(n, M+1)``.
    """
    thetas = np.asarray(thetas, dtype=float)
    if isinstance(forecasts, np.ndarray):
        coeffs = forecasts
    else:
        coeffs = np.array([getattr(f, "params", f).coeffs for f in forecasts])
    if len(coeffs) != len(thetas):
        raise ValueError(f"got {len(coeffs)} forecasts for {len(thetas)} angles")
    return nnts.batch_cdf(coeffs, np.mod(thetas, nnts.TWO_PI))


def _kuiper_sf(lam: float) -> float:
    if lam < 0.4:
        # series is numerically 1 here and converges slowly
        return 1.0
    total = 0.0
    for j in range(1, SERIES_TERMS + 1):
        j2l2 = j * j * lam * lam
        term = (4.0 * j2l2 - 1.0) * math.exp(-2.0 * j2l2)
        total += term
        if abs(term) < SERIES_TOL:
            break
    return float(min(max(2.0 * total, 0.0), 1.0))


def kuiper_test(u) -> tuple[float, float]:
    """Kuiper's V with Stephens' modification for the asymptotic p-value."""
    u = np.sort(_check_unit(u, 5))
    n = u.size
    i = np.arange(1, n + 1)
    d_plus = np.max(i / n - u)
    d_minus = np.max(u - (i - 1) / n)
    v = float(d_plus + d_minus)
    sq = math.sqrt(n)
    return v, _kuiper_sf(v * (sq + 0.155 + 0.24 / sq))


def _watson_sf(x: float) -> float:
    if x <= 0:
        return 1.0
    if x < 0.1:
        # Jacobi-transformed form converges fast for small arguments
        s = sum(math.exp(-((2 * k + 1) ** 2) / (8.0 * x)) for k in range(50))
        return float(min(max(1.0 - 2.0 * s / math.sqrt(2.0 * math.pi * x), 0.0), 1.0))
    total = 0.0
    for j in range(1, SERIES_TERMS + 1):
        term = (-1) ** (j - 1) * math.exp(-2.0 * j * j * math.pi**2 * x)
        total += term
        if abs(term) < SERIES_TOL:
            break
    return float(min(max(2.0 * total, 0.0), 1.0))


def watson_test(u) -> tuple[float, float]:
    """Watson's U^2 with the ``(U^2 - 0.1/n + 0.1/n^2)(1 + 0.8/n)`` modification."""
    u = np.sort(_check_unit(u, 5))
    n = u.size
    i = np.arange(1, n + 1)
    u2 = float(np.sum((u - (2 * i - 1) / (2.0 * n)) ** 2) - n * (u.mean() - 0.5) ** 2 + 1.0 / (12 * n))
    mod = (u2 - 0.1 / n + 0.1 / n**2) * (1.0 + 0.8 / n)
    return u2, _watson_sf(mod)


def range_cdf(w: float, n: int) -> float:
    """``P(W <= w)`` for the circular range of ``n`` uniform points (w in radians).

    Alternating finite sum over the number of gaps longer than
    ``1 - w/2pi``. When the terms are much larger than the result the sum is
    evaluated in extended precision.
    """
    g = 1.0 - w / nnts.TWO_PI
    if g <= 0:
        return 1.0
    if g >= 1:
        return 0.0
    stop = min(int(math.floor(1.0 / g)), n)
    ks = [k for k in range(1, stop + 1) if k * g < 1]
    logs = [
        math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1) + (n - 1) * math.log1p(-k * g)
        for k in ks
    ]
    if not logs:
        return 0.0
    top = max(logs)
    if top < FLOAT_SAFE_LOG:
        # little cancellation: double precision is enough
        p = math.fsum((-1) ** (k - 1) * math.exp(lt) for k, lt in zip(ks, logs))
    else:
        # terms far exceed the result; size the working precision to the largest
        with mpmath.workdps(int(top / math.log(10)) + 30):
            gm = mpmath.mpf(g)
            total = mpmath.mpf(0)
            for k in ks:
                total += (-1) ** (k - 1) * mpmath.binomial(n, k) * (1 - k * gm) ** (n - 1)
            p = float(total)
    return min(max(p, 0.0), 1.0)


def range_test(u) -> tuple[float, float]:
    """Circular range ``2pi - largest gap``; small ranges reject uniformity.

    The p-value is ``P(W <= observed)`` under uniformity.
    """
    u = np.sort(_check_unit(u, 3))
    n = u.size
    gaps = np.diff(np.concatenate([u, [u[0] + 1.0]]))
    w = float(nnts.TWO_PI * (1.0 - gaps.max()))
    return w, range_cdf(w, n)


def bh_adjust(pvalues) -> np.ndarray:
    """Benjamini-Hochberg step-up adjusted p-values, in input order."""
    p = np.asarray(pvalues, dtype=float).ravel()
    if np.any((p < 0) | (p > 1)):
        raise ValueError("p-values must lie in [0, 1]")
    n = p.size
    if n == 0:
        return p.copy()
    order = np.argsort(p)
    scaled = p[order] * n / np.arange(1, n + 1)
    adj = np.minimum.accumulate(scaled[::-1])[::-1]
    out = np.empty(n)
    out[order] = np.minimum(adj, 1.0)
    return out


@dataclass(frozen=True)
class ValidationReport:
    pit: np.ndarray = field(repr=False)
    loglik: float
    p_range: float
    p_kuiper: float
    p_watson: float
    statistics: dict


def validate(coeffs: np.ndarray, thetas) -> ValidationReport:
    """PIT uniformity tests and log-likelihood for row-wise forecasts."""
    pit = pit_series(coeffs, thetas)
    w, pr = range_test(pit)
    v, pk = kuiper_test(pit)
    u2, pw = watson_test(pit)
    return ValidationReport(
        pit=pit,
        loglik=nnts.loglik(coeffs, thetas),
        p_range=pr,
        p_kuiper=pk,
        p_watson=pw,
        statistics={"range": w, "kuiper": v, "watson": u2},
    )


def bracket(p: float, kind: str) -> str:
    """Render a p-value in the bracketed style of circular-statistics tables.

    ``kind`` is ``"kuiper"`` or ``"watson"``; range p-values are printed to
    three decimals.
    """
    if kind == "range":
        return f"{p:.3f}"
    if kind == "kuiper":
        cuts = [(0.01, "<0.01"), (0.025, "(0.01,0.025)"), (0.05, "(0.025,0.05)"), (0.10, "(0.05,0.10)"), (0.15, "(0.10,0.15)")]
        top = ">0.15"
    elif kind == "watson":
        cuts = [(0.01, "<0.01"), (0.025, "(0.01,0.025)"), (0.05, "(0.025,0.05)"), (0.10, "(0.05,0.10)")]
        top = ">0.10"
    else:
        raise ValueError(f"unknown test {kind!r}")
    for cut, label in cuts:
        if p < cut:
            return label
    return top
