"""Acceptance gate: one PASS/FAIL line per primary criterion.

Run with ``pytest tests/test_acceptance.py -s`` to see the lines.
"""

import os
import warnings
from dataclasses import replace

import numpy as np
import pytest
from scipy import stats
from scipy.integrate import quad

from nntsreg import datasets, forecast, goftests, nnts, simharness, spherefit
from nntsreg.formula import parse_formula
from nntsreg.model import fit_ar_model, fit_regression, uniform_model

WORKERS = os.cpu_count() or 1

# mean |beta_hat| for Case 1, known eigenvectors, great circle
CASE1_MEAN_ABS = {
    100: (0.077, 0.068, 0.075, 0.078, 0.074),
    1000: (0.024, 0.023, 0.021, 0.024, 0.024),
}


def verdict(name, checks):
    """Print one line and fail the test if any check failed."""
    ok = all(passed for _, passed in checks)
    detail = "; ".join(f"{text} [{'ok' if passed else 'X'}]" for text, passed in checks)
    print(f"\n{'PASS' if ok else 'FAIL'} {name}: {detail}")
    assert ok, detail


def test_uniform_baselines(periwinkle, wind):
    peri = uniform_model(periwinkle["direction"]).validation.loglik
    wnd = uniform_model(wind).validation.loglik
    verdict(
        "uniform baselines",
        [
            (f"periwinkle loglik {peri:.4f} vs -56.974", abs(peri + 56.974) <= 1e-3),
            (f"wind loglik {wnd:.4f} vs -132.327", abs(wnd + 132.327) <= 1e-3),
        ],
    )


@pytest.mark.parametrize("n", [100, 1000])
def test_case1_parity(n):
    res = simharness.run_study(simharness.SimConfig(n=n, beta=simharness.SCENARIOS[1], seed=n), workers=WORKERS)
    checks = [(f"RR {r:.3f} in [0.01, 0.11]", 0.01 <= r <= 0.11) for r in res.rr]
    checks.append((f"AR(range) {res.ar_range:.3f} >= 0.88", res.ar_range >= 0.88))
    for got, ref in zip(res.mean_abs_beta, CASE1_MEAN_ABS[n]):
        checks.append((f"mean|b| {got:.4f} vs {ref}", abs(got - ref) <= 0.3 * ref))
    checks.append((f"failed replicates {res.failed}", res.failed == 0))
    verdict(f"Case 1 simulation parity n={n} ({res.completed} replicates)", checks)


def test_case3_recovery():
    res = simharness.run_study(simharness.SimConfig(n=1000, beta=simharness.SCENARIOS[3], seed=3), workers=WORKERS)
    b5, rr5 = res.mean_abs_beta[4], res.rr[4]
    verdict(
        "Case 3 signal recovery n=1000",
        [
            (f"mean b5 {b5:.4f} vs 0.267 +- 0.03", abs(b5 - 0.267) <= 0.03),
            (f"RR(b5) {rr5:.3f} >= 0.98", rr5 >= 0.98),
        ],
    )


@pytest.fixture(scope="module")
def periwinkle_fits(periwinkle):
    f = parse_formula("I(distance<=27)*(distance-27)")
    x = f.design(periwinkle)
    th = periwinkle["direction"]
    return {(c, m): fit_regression(th, x, m, c, f.names) for c in ("great", "small") for m in range(1, 9)}


def test_periwinkle(periwinkle_fits):
    mdl = periwinkle_fits[("small", 8)]
    b, se = mdl.beta[0], mdl.stderr[0]
    ll, p = mdl.validation.loglik, mdl.validation.p_range
    verdict(
        "periwinkle small circle M=8",
        [
            # the sign of beta follows the arbitrary sign of the eigenvector d
            (f"|beta| {abs(b):.4f} (beta {b:.4f}) vs 0.300 +- 0.015", abs(abs(b) - 0.300) <= 0.015),
            (f"se {se:.4f} vs 0.089 +- 0.01", abs(se - 0.089) <= 0.01),
            (f"loglik {ll:.3f} vs -19.786 +- 1", abs(ll + 19.786) <= 1.0),
            (f"range p {p:.4f} in (0.2, 0.5)", 0.2 < p < 0.5),
        ],
    )


def test_periwinkle_fallback_properties(periwinkle_fits):
    checks = []
    for m in range(1, 9):
        g, s = periwinkle_fits[("great", m)].fit.ssc, periwinkle_fits[("small", m)].fit.ssc
        checks.append((f"M={m} small SSC {s:.3f} >= great {g:.3f}", s >= g - 1e-12))
    for kind in ("great", "small"):
        r = [periwinkle_fits[(kind, m)].r2cos for m in range(1, 9)]
        checks.append((f"{kind} R2cos nonincreasing {r[0]:.3f}->{r[-1]:.3f}", bool(np.all(np.diff(r) <= 1e-12))))
    verdict("periwinkle fallback property suite", checks)


def test_wind(wind):
    ar1 = fit_ar_model(wind, 4, 1)
    ar2 = fit_ar_model(wind, 4, 2)
    c = ar1.beta[0]
    verdict(
        "wind great circle M=4",
        [
            (f"AR(1) coef {c:.4f} vs 0.5276 +- 0.03", abs(abs(c) - 0.5276) <= 0.03),
            (f"AR(1) loglik {ar1.validation.loglik:.3f} vs -78.050 +- 2", abs(ar1.validation.loglik + 78.050) <= 2),
            (f"AR(2) loglik {ar2.validation.loglik:.3f} vs -73.967 +- 2", abs(ar2.validation.loglik + 73.967) <= 2),
        ],
    )


def _fibonacci_sphere(k):
    i = np.arange(k) + 0.5
    z = 1 - 2 * i / k
    r = np.sqrt(1 - z**2)
    phi = np.pi * (1 + 5**0.5) * i
    return np.column_stack([r * np.cos(phi), r * np.sin(phi), z])


def test_property_suite():
    rng = np.random.default_rng(2024)
    checks = []

    # density normalization over random parameters
    worst = 0.0
    for _ in range(1000):
        p = nnts.random_params(int(rng.integers(1, 9)), rng)
        worst = max(worst, abs(quad(lambda t: nnts.density(p, t), 0, 2 * np.pi, limit=200, epsabs=1e-13)[0] - 1))
    checks.append((f"normalization max err {worst:.1e} <= 1e-9", worst <= 1e-9))

    # cdf monotone with exact endpoints
    mono, ends = True, True
    grid = np.linspace(0, 2 * np.pi, 2001)
    for _ in range(100):
        p = nnts.random_params(int(rng.integers(1, 9)), rng)
        f = nnts.cdf(p, grid)
        mono &= bool(np.all(np.diff(f) >= -1e-15))
        ends &= nnts.cdf(p, 0.0) == 0.0 and nnts.cdf(p, 2 * np.pi) == 1.0
    checks.append(("cdf monotone", mono))
    checks.append(("cdf endpoints exact", ends))

    # eigen-basis orthonormality and SSC bound
    orth, bound = 0.0, True
    for m in range(1, 9):
        th = rng.uniform(0, 2 * np.pi, 50)
        e = spherefit.embed(th, m)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", spherefit.DegenerateSpectrumWarning)
            g = spherefit.fit_great_circle(e)
            s = spherefit.fit_small_circle(e)
        basis = np.array([s.b, s.a, s.d])
        orth = max(orth, np.max(np.abs(basis @ basis.T - np.eye(3))), abs(g.a @ g.d))
        bound &= 0 <= g.ssc <= 50 + 1e-9 and 0 <= s.ssc <= 50 + 1e-9
    checks.append((f"orthonormality err {orth:.1e} <= 1e-10", orth <= 1e-10))
    checks.append(("SSC <= n", bound))

    # brute-force SSC oracle, M=1
    normals = _fibonacci_sphere(200_000)
    gap = 0.0
    for n in range(2, 7):
        e = spherefit.embed(rng.uniform(0, 2 * np.pi, n), 1)
        brute = np.max(n - np.sum((e @ normals.T) ** 2, axis=0))
        gap = max(gap, (brute - spherefit.fit_great_circle(e).ssc) / n)
    checks.append((f"brute-force SSC excess {gap:.1e} <= 0", gap <= 1e-12))

    # PIT of the truth
    coeffs = np.array([nnts.random_params(3, rng).coeffs for _ in range(10_000)])
    pit = goftests.pit_series(coeffs, nnts.batch_sample(coeffs, rng))
    ks_p = stats.kstest(pit, "uniform").pvalue
    checks.append((f"PIT-of-truth KS p {ks_p:.3f} > 0.01", ks_p > 0.01))

    # size calibration
    u = rng.uniform(size=(10_000, 100))
    for name, test in (("range", goftests.range_test), ("kuiper", goftests.kuiper_test), ("watson", goftests.watson_test)):
        rate = np.mean([test(row)[1] < 0.05 for row in u])
        checks.append((f"{name} size {rate:.4f}", abs(rate - 0.05) <= 0.01))

    # small circle at alpha = pi/2 is the great circle
    small = simharness.random_circle(3, "small", 1)
    flat = replace(small, alpha=np.pi / 2)
    great = spherefit.GreatCircleFit(a=small.a, d=small.d, ssc=0.0, n=1, eigenvalues=small.eigenvalues, degenerate=False)
    diff = 0.0
    t = np.linspace(0, 2 * np.pi, 721)
    for lin in np.linspace(-5, 5, 41):
        fs = forecast.forecast_small(flat, [1.0], [lin], 1).params
        fg = forecast.forecast_great(great, forecast.predict_phi([lin], [1.0])).params
        diff = max(diff, np.max(np.abs(nnts.density(fs, t) - nnts.density(fg, t))))
    checks.append((f"alpha=pi/2 nesting err {diff:.1e} <= 1e-10", diff <= 1e-10))

    # closed-form alpha against the numerical maximizer
    worst_alpha = 0.0
    for seed in range(20):
        r = np.random.default_rng(seed)
        m = int(r.integers(1, 5))
        circ = replace(simharness.random_circle(m, "small", r), alpha=float(r.uniform(0.2, 1.3)))
        c = nnts.real_to_complex(circ.point(r.uniform(-np.pi, np.pi, 300)))
        e = spherefit.embed(nnts.batch_sample(nnts.canonical_phase(c), r), m)
        fit = spherefit.fit_small_circle(e)
        a_num = spherefit.alpha_numeric(e @ fit.b, np.hypot(e @ fit.a, e @ fit.d))
        worst_alpha = max(worst_alpha, abs(fit.alpha - a_num))
    checks.append((f"closed-form alpha vs numeric {worst_alpha:.1e} <= 1e-6", worst_alpha <= 1e-6))

    verdict("property suite", checks)
