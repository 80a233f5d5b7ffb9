"""Nonnegative trigonometric sums (NNTS) densities on the circle.

An NNTS density with ``M`` harmonics is the squared modulus of a complex
trigonometric polynomial,

    f(theta) = |sum_k c_k exp(i k theta)|^2 / (2 pi),   sum_k |c_k|^2 = 1,

so the parameter space is the unit sphere in C^(M+1). The constant
coefficient ``c_0`` is kept real and nonnegative, which leaves a real
representation of dimension ``2M + 1``::

    (Re c_0, Re c_1, ..., Re c_M, Im c_1, ..., Im c_M)

This is the same layout used for the trigonometric moment vectors in
:mod:`nntsreg.spherefit`, so a fitted point on the parameter hypersphere can
be read back directly as an NNTS parameter.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

TWO_PI = 2.0 * np.pi

NORM_TOL = 1e-6


class NntsError(ValueError):
    """Invalid NNTS parameters."""


@dataclass(frozen=True)
class NntsParams:
    """Canonical NNTS parameter vector.

    Use :meth:`from_complex` or :meth:`from_real` rather than the raw
    constructor; they enforce the unit-norm constraint and the phase
    convention (``c_0`` real and nonnegative).

    Attributes
    ----------
    coeffs : np.ndarray
        Complex coefficients ``c_0 .. c_M``.
    """

    coeffs: np.ndarray

    @property
    def m(self) -> int:
        return len(self.coeffs) - 1

    @classmethod
    def from_complex(cls, coeffs: Sequence[complex]) -> "NntsParams":
        c = np.asarray(coeffs, dtype=complex).ravel()
        if c.size == 0:
            raise NntsError("need at least one coefficient")
        if not np.all(np.isfinite(c)):
            raise NntsError("coefficients must be finite")
        norm = np.linalg.norm(c)
        if abs(norm - 1.0) > NORM_TOL:
            raise NntsError(f"coefficient norm {norm:.9g} violates the unit-norm constraint")
        c = canonical_phase(c) / norm
        c.setflags(write=False)
        return cls(c)

    @classmethod
    def from_real(cls, vec: Sequence[float]) -> "NntsParams":
        return cls.from_complex(real_to_complex(np.asarray(vec, dtype=float)))

    @classmethod
    def uniform(cls, m: int = 0) -> "NntsParams":
        c = np.zeros(m + 1, dtype=complex)
        c[0] = 1.0
        return cls.from_complex(c)

    def to_real(self) -> np.ndarray:
        return complex_to_real(self.coeffs)

    def __eq__(self, other):
        if not isinstance(other, NntsParams):
            return NotImplemented
        return np.array_equal(self.coeffs, other.coeffs)

    def __hash__(self):
        return hash(self.coeffs.tobytes())


def canonical_phase(c: np.ndarray) -> np.ndarray:
    """Rotate the global phase so the leading coefficient is real and >= 0.

    The density is invariant to a global phase. When ``c_0`` is zero the
    first nonzero coefficient is made real positive instead.
    """
    c = np.asarray(c, dtype=complex)
    if c.ndim == 1:
        nz = np.flatnonzero(np.abs(c) > 1e-15)
        if nz.size == 0:
            return c.copy()
        lead = c[nz[0]]
        out = c * (np.abs(lead) / lead)
        out[nz[0]] = np.abs(lead)
        return out
    mag = np.abs(c)
    first = np.argmax(mag > 1e-15, axis=1)
    lead = c[np.arange(c.shape[0]), first]
    scale = np.where(np.abs(lead) > 0, np.abs(lead) / np.where(lead == 0, 1, lead), 1.0)
    out = c * scale[:, None]
    out[np.arange(c.shape[0]), first] = np.abs(lead)
    return out


def real_to_complex(vec: np.ndarray) -> np.ndarray:
    """Map real ``(2M+1)``-vectors (last axis) to complex ``(M+1)``-vectors."""
    vec = np.asarray(vec, dtype=float)
    if vec.shape[-1] % 2 != 1:
        raise NntsError(f"real parameter length must be odd, got {vec.shape[-1]}")
    m = (vec.shape[-1] - 1) // 2
    out = np.empty(vec.shape[:-1] + (m + 1,), dtype=complex)
    out[..., 0] = vec[..., 0]
    out[..., 1:] = vec[..., 1 : m + 1] + 1j * vec[..., m + 1 :]
    return out


def complex_to_real(c: np.ndarray) -> np.ndarray:
    """Inverse of :func:`real_to_complex`; ``Im c_0`` is dropped."""
    c = np.asarray(c, dtype=complex)
    return np.concatenate([c.real, c[..., 1:].imag], axis=-1)


def _lag_products(c: np.ndarray) -> np.ndarray:
    """``g_j = sum_m c_{m+j} conj(c_m)`` for ``j = 1..M`` (last axis)."""
    m = c.shape[-1] - 1
    g = np.empty(c.shape[:-1] + (m,), dtype=complex)
    for j in range(1, m + 1):
        g[..., j - 1] = np.sum(c[..., j:] * np.conj(c[..., : m + 1 - j]), axis=-1)
    return g


def batch_density(coeffs: np.ndarray, theta) -> np.ndarray:
    """Density for row-wise parameters.

    Parameters
    ----------
    coeffs : np.ndarray
        Complex array ``(n, M+1)``; row ``k`` parameterizes observation ``k``.
    theta : array_like
        Angles of length ``n``.
    """
    c = np.asarray(coeffs, dtype=complex)
    theta = np.asarray(theta, dtype=float)
    k = np.arange(c.shape[-1])
    z = np.sum(c * np.exp(1j * theta[..., None] * k), axis=-1)
    return (z.real**2 + z.imag**2) / TWO_PI


def batch_cdf(coeffs: np.ndarray, theta) -> np.ndarray:
    """CDF from 0 for row-wise parameters, by termwise integration.

    With ``g_j`` as in :func:`_lag_products`,
    ``F(t) = t / 2pi + (1/pi) sum_j Re[g_j (exp(i j t) - 1) / (i j)]``.
    """
    c = np.asarray(coeffs, dtype=complex)
    theta = _reduce_for_cdf(np.asarray(theta, dtype=float))
    total = np.sum(np.abs(c) ** 2, axis=-1)
    out = total * theta / TWO_PI
    m = c.shape[-1] - 1
    if m:
        g = _lag_products(c)
        j = np.arange(1, m + 1)
        terms = g * (np.exp(1j * theta[..., None] * j) - 1.0) / (1j * j)
        out = out + np.sum(terms.real, axis=-1) / np.pi
    # exp(2 pi i j) - 1 is not exactly zero in floating point
    out = np.where(theta == TWO_PI, 1.0, out)
    return np.clip(out, 0.0, 1.0)


def _reduce_for_cdf(theta: np.ndarray) -> np.ndarray:
    # 2pi itself is kept so that F(2pi) = 1
    outside = (theta < 0) | (theta > TWO_PI)
    return np.where(outside, np.mod(theta, TWO_PI), theta)


def density(params: NntsParams, theta) -> np.ndarray | float:
    """NNTS density at ``theta`` (scalar or array), in 1/radian."""
    theta = np.asarray(theta, dtype=float)
    out = batch_density(np.broadcast_to(params.coeffs, theta.shape + params.coeffs.shape), theta)
    return float(out) if out.ndim == 0 else out


def cdf(params: NntsParams, theta) -> np.ndarray | float:
    """Closed-form CDF ``F(theta) = integral_0^theta f``."""
    theta = np.asarray(theta, dtype=float)
    out = batch_cdf(np.broadcast_to(params.coeffs, theta.shape + params.coeffs.shape), theta)
    return float(out) if out.ndim == 0 else out


def batch_first_trig_moment(coeffs: np.ndarray) -> np.ndarray:
    """``E exp(i theta) = sum_k c_k conj(c_{k+1})`` for row-wise parameters."""
    c = np.asarray(coeffs, dtype=complex)
    if c.shape[-1] == 1:
        return np.zeros(c.shape[:-1], dtype=complex)
    return np.sum(c[..., :-1] * np.conj(c[..., 1:]), axis=-1)


def first_trig_moment(params: NntsParams) -> complex:
    """First trigonometric moment ``E[exp(i theta)]``.

    Its modulus is the mean resultant length (circular variance is one minus
    it) and its argument is the mean direction.
    """
    return complex(batch_first_trig_moment(params.coeffs))


def batch_sample(coeffs: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Draw one angle per parameter row by rejection from the uniform.

    The envelope ``(sum_k |c_k|)^2 / 2pi`` bounds the density by the triangle
    inequality; the acceptance rate is at least ``1 / (M+1)``.
    """
    c = np.atleast_2d(np.asarray(coeffs, dtype=complex))
    bound = np.sum(np.abs(c), axis=-1) ** 2 / TWO_PI
    out = np.empty(c.shape[0])
    todo = np.arange(c.shape[0])
    while todo.size:
        t = rng.uniform(0.0, TWO_PI, todo.size)
        u = rng.uniform(0.0, 1.0, todo.size)
        ok = u * bound[todo] <= batch_density(c[todo], t)
        out[todo[ok]] = t[ok]
        todo = todo[~ok]
    return out


def sample(params: NntsParams, n: int, seed: int | np.random.Generator) -> np.ndarray:
    """``n`` i.i.d. angles in ``[0, 2pi)`` from the NNTS density."""
    if n < 1:
        raise ValueError("n must be positive")
    rng = np.random.default_rng(seed)
    return batch_sample(np.broadcast_to(params.coeffs, (n,) + params.coeffs.shape), rng)


def loglik(params_seq: Sequence[NntsParams] | np.ndarray, thetas) -> float:
    """Sum of log densities with one parameter vector per observation.

    ``params_seq`` may be a list of :class:`NntsParams` or a complex array
    ``(n, M+1)``. A zero density gives ``-inf`` and a warning naming the
    first offending index.
    """
    if isinstance(params_seq, np.ndarray):
        coeffs = params_seq
    else:
        coeffs = np.array([p.coeffs for p in params_seq])
    thetas = np.asarray(thetas, dtype=float)
    if len(coeffs) != len(thetas):
        raise ValueError(f"got {len(coeffs)} parameter vectors for {len(thetas)} angles")
    f = batch_density(coeffs, thetas)
    if np.any(f <= 0):
        bad = int(np.flatnonzero(f <= 0)[0])
        warnings.warn(f"density underflows to zero at observation {bad}", RuntimeWarning)
        return -np.inf
    return float(np.sum(np.log(f)))


def uniform_loglik(n: int) -> float:
    return -n * np.log(TWO_PI)


def random_params(m: int, rng: np.random.Generator) -> NntsParams:
    """Uniformly distributed point on the NNTS parameter sphere."""
    z = rng.standard_normal(m + 1) + 1j * rng.standard_normal(m + 1)
    return NntsParams.from_complex(z / np.linalg.norm(z))
