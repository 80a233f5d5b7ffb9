import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose
from scipy import integrate

from nntsreg import nnts
from nntsreg.nnts import NntsError, NntsParams

TWO_PI = 2 * np.pi


def params_strategy(max_m=6):
    @st.composite
    def build(draw):
        m = draw(st.integers(0, max_m))
        seed = draw(st.integers(0, 2**32 - 1))
        return nnts.random_params(m, np.random.default_rng(seed))

    return build()


def quad_density(p, a, b):
    return integrate.quad(lambda t: nnts.density(p, t), a, b, limit=200, epsabs=1e-13)[0]


class TestParams:
    def test_from_complex_canonicalizes_phase(self):
        c = np.exp(1j * 0.7) * np.array([0.6, 0.8j])
        p = NntsParams.from_complex(c)
        assert p.coeffs[0].imag == 0 and p.coeffs[0].real > 0
        assert_allclose(p.coeffs, [0.6, 0.8j], atol=1e-15)

    def test_global_phase_leaves_density_unchanged(self, rng):
        p = nnts.random_params(4, rng)
        q = NntsParams.from_complex(p.coeffs * np.exp(2.1j))
        t = np.linspace(0, TWO_PI, 50)
        assert_allclose(nnts.density(p, t), nnts.density(q, t), atol=1e-14)

    @pytest.mark.parametrize("scale", [0.5, 1.01, 2.0])
    def test_norm_violation_rejected(self, scale):
        with pytest.raises(NntsError, match="unit-norm"):
            NntsParams.from_complex(scale * np.array([1.0, 0.0]))

    def test_small_norm_drift_is_renormalized(self):
        p = NntsParams.from_complex([1.0 + 5e-7, 0.0])
        assert_allclose(np.linalg.norm(p.coeffs), 1.0, atol=1e-15)

    def test_read_only(self):
        p = NntsParams.uniform(2)
        with pytest.raises(ValueError):
            p.coeffs[0] = 0.5

    def test_real_round_trip(self, rng):
        p = nnts.random_params(5, rng)
        v = p.to_real()
        assert v.shape == (11,)
        assert_allclose(NntsParams.from_real(v).coeffs, p.coeffs, atol=1e-15)

    def test_even_real_length_rejected(self):
        with pytest.raises(NntsError, match="odd"):
            NntsParams.from_real([1.0, 0.0])

    def test_non_finite_rejected(self):
        with pytest.raises(NntsError, match="finite"):
            NntsParams.from_complex([np.nan, 1.0])


class TestDensity:
    def test_uniform_is_flat(self):
        t = np.linspace(0, TWO_PI, 7)
        assert_allclose(nnts.density(NntsParams.uniform(0), t), 1 / TWO_PI)

    def test_sign_convention(self):
        # c_k = exp(-i k t0)/sqrt(M+1) peaks at t0
        t0, m = 1.2, 3
        c = np.exp(-1j * np.arange(m + 1) * t0) / np.sqrt(m + 1)
        p = NntsParams.from_complex(c)
        grid = np.linspace(0, TWO_PI, 3601)
        assert grid[np.argmax(nnts.density(p, grid))] == pytest.approx(t0, abs=2e-3)

    @settings(max_examples=60, deadline=None)
    @given(params_strategy())
    def test_integrates_to_one(self, p):
        assert quad_density(p, 0, TWO_PI) == pytest.approx(1.0, abs=1e-9)

    @settings(max_examples=60, deadline=None)
    @given(params_strategy())
    def test_nonnegative(self, p):
        assert np.all(nnts.density(p, np.linspace(0, TWO_PI, 257)) >= 0)


class TestCdf:
    @settings(max_examples=40, deadline=None)
    @given(params_strategy(), st.floats(0, TWO_PI))
    def test_matches_quadrature(self, p, t):
        assert nnts.cdf(p, t) == pytest.approx(quad_density(p, 0, t), abs=1e-9)

    @settings(max_examples=40, deadline=None)
    @given(params_strategy())
    def test_monotone_with_exact_endpoints(self, p):
        grid = np.linspace(0, TWO_PI, 513)
        f = nnts.cdf(p, grid)
        assert f[0] == 0.0
        assert f[-1] == pytest.approx(1.0, abs=1e-12)
        assert np.all(np.diff(f) >= -1e-12)

    def test_uniform_cdf_is_linear(self):
        t = np.array([0.0, 1.0, np.pi, 5.0])
        assert_allclose(nnts.cdf(NntsParams.uniform(0), t), t / TWO_PI, atol=1e-15)


class TestMoments:
    @pytest.mark.parametrize("m", [0, 1, 3, 6])
    def test_first_moment_matches_quadrature(self, m, rng):
        p = nnts.random_params(m, rng)
        re = integrate.quad(lambda t: np.cos(t) * nnts.density(p, t), 0, TWO_PI, limit=200)[0]
        im = integrate.quad(lambda t: np.sin(t) * nnts.density(p, t), 0, TWO_PI, limit=200)[0]
        assert nnts.first_trig_moment(p) == pytest.approx(complex(re, im), abs=1e-10)

    def test_modulus_at_most_one(self, rng):
        for _ in range(100):
            assert abs(nnts.first_trig_moment(nnts.random_params(4, rng))) <= 1 + 1e-12


class TestSampling:
    def test_sample_matches_cdf(self, rng):
        from scipy import stats

        p = nnts.random_params(3, rng)
        x = nnts.sample(p, 5000, seed=3)
        assert np.all((x >= 0) & (x < TWO_PI))
        assert stats.kstest(nnts.cdf(p, x), "uniform").pvalue > 0.01

    def test_seeded(self, rng):
        p = nnts.random_params(2, rng)
        assert_allclose(nnts.sample(p, 10, seed=5), nnts.sample(p, 10, seed=5))

    def test_bad_size(self):
        with pytest.raises(ValueError):
            nnts.sample(NntsParams.uniform(1), 0, seed=1)


class TestLoglik:
    @pytest.mark.parametrize("n, expected", [(31, -56.974), (72, -132.327)])
    def test_uniform_baseline(self, n, expected):
        assert nnts.uniform_loglik(n) == pytest.approx(expected, abs=1e-3)
        thetas = np.linspace(0, 6, n)
        assert nnts.loglik([NntsParams.uniform(0)] * n, thetas) == pytest.approx(-n * np.log(TWO_PI))

    def test_zero_density_warns(self):
        # density of c = (1, -1)/sqrt(2) vanishes at 0
        p = NntsParams.from_complex(np.array([1.0, -1.0]) / np.sqrt(2))
        with pytest.warns(RuntimeWarning, match="observation 1"):
            ll = nnts.loglik([NntsParams.uniform(1), p], [0.3, 0.0])
        assert ll == -np.inf

    def test_length_mismatch(self):
        with pytest.raises(ValueError, match="2 parameter vectors for 3"):
            nnts.loglik([NntsParams.uniform(0)] * 2, [0.0, 1.0, 2.0])

    def test_array_and_list_agree(self, rng):
        ps = [nnts.random_params(2, rng) for _ in range(5)]
        t = rng.uniform(0, TWO_PI, 5)
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            assert nnts.loglik(ps, t) == pytest.approx(nnts.loglik(np.array([p.coeffs for p in ps]), t))
