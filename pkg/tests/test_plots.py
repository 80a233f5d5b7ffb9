import numpy as np
import pytest
from numpy.testing import assert_allclose

from nntsreg import nnts, plots


def test_uniform_curve():
    t, f = plots.density_curve(np.array([1.0 + 0j]))
    assert t[0] == 0 and t[-1] == pytest.approx(2 * np.pi)
    assert_allclose(f, 1 / (2 * np.pi))


@pytest.mark.parametrize("seed", range(5))
def test_curve_integrates_to_one(seed):
    c = nnts.random_params(4, np.random.default_rng(seed)).coeffs
    t, f = plots.density_curve(c)
    assert np.trapezoid(f, t) == pytest.approx(1.0, abs=1e-3)


def test_density_svg_deterministic():
    c = np.array([nnts.random_params(2, np.random.default_rng(s)).coeffs for s in range(3)])
    a = plots.density_figure(c, ["a", "b", "c"], title="t")
    b = plots.density_figure(c, ["a", "b", "c"], title="t")
    assert a == b
    assert a.startswith("<?xml") and "<svg" in a


def test_other_figures():
    rng = np.random.default_rng(1)
    c = np.array([nnts.random_params(2, rng).coeffs for _ in range(11)])
    x = np.linspace(0, 1, 11)
    mv = plots.mean_variance_figure(x, c, "x", mixture=nnts.batch_first_trig_moment(c))
    assert "branch mixture" in mv
    assert "PACF" in plots.correlogram_figure(rng.normal(size=60), 10)
    assert "<svg" in plots.scatter_figure(x, rng.normal(size=11), "x")
