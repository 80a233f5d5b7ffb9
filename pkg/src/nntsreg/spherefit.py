"""Great- and small-circle fits on the NNTS parameter hypersphere.

Each angle is embedded as the unit vector of its first ``M`` trigonometric
moments of minus theta. The best-fitting circle maximizes the sum of squared
cosines (SSC) between the embedded points and their nearest points on the
circle; its defining vectors are the leading eigenvectors of the moment
matrix ``E = sum_k e_k e_k^T``.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.optimize import minimize_scalar

logger = logging.getLogger(__name__)

TIE_TOL = 1e-8
SIGN_TOL = 1e-12
ALPHA_ORACLE_TOL = 1e-6


class DegenerateSpectrumWarning(RuntimeWarning):
    """Leading eigenvalues are too close to pin down the circle."""


def embed(theta, m: int) -> np.ndarray:
    """Trigonometric moment vectors on the unit sphere S(2M).

    Returns ``(1, cos t, ..., cos Mt, -sin t, ..., -sin Mt) / sqrt(M+1)``;
    shape ``(2M+1,)`` for a scalar angle and ``(n, 2M+1)`` for an array.

    Examples
    --------
    >>> embed(0.0, 2) * np.sqrt(3)
    array([1., 1., 1., 0., 0.])
    """
    if m < 1:
        raise ValueError("m must be at least 1")
    t = np.asarray(theta, dtype=float)
    k = np.arange(1, m + 1)
    kt = t[..., None] * k
    ones = np.ones(t.shape + (1,))
    return np.concatenate([ones, np.cos(kt), -np.sin(kt)], axis=-1) / np.sqrt(m + 1)


def moment_matrix(vectors: np.ndarray | Sequence[np.ndarray]) -> np.ndarray:
    """Scatter matrix ``sum_k e_k e_k^T`` of embedded angles."""
    if not isinstance(vectors, np.ndarray):
        lengths = {len(v) for v in vectors}
        if len(lengths) > 1:
            raise ValueError(f"inconsistent embedding dimensions {sorted(lengths)}")
    e = np.atleast_2d(np.asarray(vectors, dtype=float))
    if e.shape[0] == 0:
        raise ValueError("no vectors")
    if e.shape[1] % 2 != 1:
        raise ValueError(f"embedding dimension must be odd, got {e.shape[1]}")
    return e.T @ e


def _orient(v: np.ndarray) -> np.ndarray:
    """Flip so the first coordinate above SIGN_TOL in magnitude is positive."""
    idx = np.flatnonzero(np.abs(v) > SIGN_TOL)
    if idx.size and v[idx[0]] < 0:
        return -v
    return v


def _leading_eigvecs(e: np.ndarray, k: int):
    E = moment_matrix(e)
    try:
        w, v = np.linalg.eigh(E)
    except np.linalg.LinAlgError as exc:
        raise np.linalg.LinAlgError(f"eigen-decomposition failed: {exc}") from exc
    order = np.argsort(w)[::-1]
    w, v = w[order], v[:, order]
    vecs = [_orient(v[:, j]) for j in range(k)]
    n = e.shape[0]
    degenerate = k < len(w) and (w[k - 1] - w[k]) < TIE_TOL * n
    if degenerate:
        warnings.warn(
            f"eigenvalues {k} and {k + 1} tie ({w[k - 1]:.3g} vs {w[k]:.3g}); "
            "the fitted circle is not unique",
            DegenerateSpectrumWarning,
            stacklevel=3,
        )
    return w, vecs, degenerate


@dataclass(frozen=True)
class GreatCircleFit:
    """Great circle ``a cos(phi) + d sin(phi)`` with its fit diagnostics."""

    a: np.ndarray
    d: np.ndarray
    ssc: float
    n: int
    eigenvalues: np.ndarray = field(repr=False)
    degenerate: bool = False

    @property
    def m(self) -> int:
        return (len(self.a) - 1) // 2

    @property
    def r2cos(self) -> float:
        return self.ssc / self.n if self.n else float("nan")

    def point(self, phi) -> np.ndarray:
        phi = np.asarray(phi, dtype=float)
        return np.cos(phi)[..., None] * self.a + np.sin(phi)[..., None] * self.d


@dataclass(frozen=True)
class SmallCircleFit:
    """Small circle ``cos(alpha) b + sin(alpha) (a cos(phi) + d sin(phi))``.

    ``ssc`` is the three-direction sum over ``b, a, d``; ``ssc_alpha`` is
    the SSC of the circle at the fitted ``alpha`` itself.
    """

    b: np.ndarray
    a: np.ndarray
    d: np.ndarray
    alpha: float
    ssc: float
    ssc_alpha: float
    n: int
    eigenvalues: np.ndarray = field(repr=False)
    degenerate: bool = False

    @property
    def m(self) -> int:
        return (len(self.a) - 1) // 2

    @property
    def r2cos(self) -> float:
        return self.ssc / self.n if self.n else float("nan")

    def point(self, phi) -> np.ndarray:
        phi = np.asarray(phi, dtype=float)
        ring = np.cos(phi)[..., None] * self.a + np.sin(phi)[..., None] * self.d
        return np.cos(self.alpha) * self.b + np.sin(self.alpha) * ring


def fit_great_circle(vectors: np.ndarray) -> GreatCircleFit:
    """Great circle through the top two eigenvectors of the moment matrix."""
    e = np.atleast_2d(np.asarray(vectors, dtype=float))
    if e.shape[0] < 2:
        raise ValueError("need at least two vectors")
    w, (a, d), degenerate = _leading_eigvecs(e, 2)
    ssc = float(np.sum((e @ a) ** 2) + np.sum((e @ d) ** 2))
    return GreatCircleFit(a=a, d=d, ssc=ssc, n=e.shape[0], eigenvalues=w, degenerate=degenerate)


def small_circle_ssc(alpha, u: np.ndarray, r: np.ndarray) -> np.ndarray:
    """SSC of a small circle at ``alpha`` given projections.

    ``u`` are projections on ``b`` and ``r`` the norms of the projections on
    the ``(a, d)`` plane. The nearest point of the circle to ``e_k`` has
    cosine ``cos(alpha) u_k + sin(alpha) r_k``.
    """
    alpha = np.asarray(alpha, dtype=float)
    cos_k = np.cos(alpha)[..., None] * u + np.sin(alpha)[..., None] * r
    return np.sum(cos_k**2, axis=-1)


def alpha_closed_form(u: np.ndarray, r: np.ndarray) -> float:
    """Maximizer of :func:`small_circle_ssc`, reduced to ``[0, pi)``.

    Expanding the SSC gives a sinusoid in ``2 alpha`` whose peak is at
    ``atan2(2 sum sign(u) |u| r, sum (u^2 - r^2)) / 2``.
    """
    num = 2.0 * np.sum(np.sign(u) * np.abs(u) * r)
    den = np.sum(u**2 - r**2)
    return float(np.mod(0.5 * np.arctan2(num, den), np.pi))


def alpha_numeric(u: np.ndarray, r: np.ndarray, grid: int = 721) -> float:
    """Grid search plus bounded refinement of the small-circle SSC over ``[0, pi)``."""
    alphas = np.linspace(0.0, np.pi, grid, endpoint=False)
    vals = small_circle_ssc(alphas, u, r)
    i = int(np.argmax(vals))
    step = np.pi / grid
    res = minimize_scalar(
        lambda al: -float(small_circle_ssc(al, u, r)),
        bounds=(alphas[i] - step, alphas[i] + step),
        method="bounded",
        options={"xatol": 1e-12},
    )
    return float(np.mod(res.x, np.pi))


def _circ_diff_pi(x: float, y: float) -> float:
    d = np.mod(x - y, np.pi)
    return float(min(d, np.pi - d))


def fit_small_circle(vectors: np.ndarray) -> SmallCircleFit:
    """Small circle from the top three eigenvectors; ``alpha`` maximizes SSC."""
    e = np.atleast_2d(np.asarray(vectors, dtype=float))
    if e.shape[0] < 3:
        raise ValueError("need at least three vectors")
    if e.shape[1] < 3:
        raise ValueError("small circles need M >= 1")
    w, (b, a, d), degenerate = _leading_eigvecs(e, 3)
    u = e @ b
    r = np.hypot(e @ a, e @ d)
    alpha = alpha_closed_form(u, r)
    check = alpha_numeric(u, r)
    gap = float(small_circle_ssc(check, u, r) - small_circle_ssc(alpha, u, r))
    if _circ_diff_pi(alpha, check) > ALPHA_ORACLE_TOL and gap > 0:
        logger.warning(
            "closed-form alpha %.9f disagrees with numerical maximizer %.9f; using the latter",
            alpha,
            check,
        )
        alpha = check
    ssc = float(np.sum(u**2) + np.sum(r**2))
    return SmallCircleFit(
        b=b,
        a=a,
        d=d,
        alpha=alpha,
        ssc=ssc,
        ssc_alpha=float(small_circle_ssc(alpha, u, r)),
        n=e.shape[0],
        eigenvalues=w,
        degenerate=degenerate,
    )


def to_linear(vectors: np.ndarray, fit: GreatCircleFit | SmallCircleFit):
    """Transformed linear response ``y = (e.d) / (e.a)`` and branch sign.

    Returns ``(y, branch)``. ``branch`` is ``sign(e.a)``; where ``e.a`` is
    exactly zero ``y`` is ``+-inf`` and ``branch`` is 0, and a warning is
    issued so callers can drop those rows.
    """
    e = np.asarray(vectors, dtype=float)
    pa = e @ fit.a
    pd = e @ fit.d
    branch = np.sign(pa).astype(int)
    with np.errstate(divide="ignore", invalid="ignore"):
        y = pd / pa
    zero = pa == 0
    if np.any(zero):
        y = np.where(zero, np.copysign(np.inf, np.where(pd == 0, 1.0, pd)), y)
        warnings.warn(f"{int(np.sum(zero))} vector(s) orthogonal to a; y is infinite", RuntimeWarning)
    if y.ndim == 0:
        return float(y), int(branch)
    return y, branch


def rotation_angles(vectors: np.ndarray, fit: GreatCircleFit | SmallCircleFit) -> np.ndarray:
    """Position of each vector's nearest circle point, in ``[-pi/2, pi/2)``."""
    y, _ = to_linear(vectors, fit)
    phi = np.arctan(y)
    return np.where(phi >= np.pi / 2, phi - np.pi, phi)
