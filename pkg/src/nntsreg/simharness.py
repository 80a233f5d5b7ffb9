"""Monte Carlo study of circle regression: coefficient tests and PIT checks.

Each replicate draws a generating circle, simulates angles whose NNTS
parameters move along that circle with ``phi_k = arctan(x_k^T beta)``, refits
the model (with the generating circle either known or estimated) and records
coefficient rejections and PIT uniformity acceptances at 5%.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Sequence

import numpy as np

from . import forecast, goftests, linmod, nnts, spherefit

logger = logging.getLogger(__name__)

DESIGN_ROWS = 1000
GENERATING_SAMPLE = 5000
LEVEL = 0.05
MAX_CIRCLE_RETRIES = 10
RELIABLE_M = 5
MAX_M = 8

SCENARIOS = {
    1: (0.0, 0.0, 0.0, 0.0, 0.0),
    2: (0.3, 0.2, 0.15, 0.2, 0.3),
    3: (0.0, 0.0, 0.0, 0.0, 0.3),
    4: (None, None, None, None, 0.3),
}


@dataclass(frozen=True)
class SimConfig:
    """One cell of the simulation study.

    ``beta`` entries set to ``None`` drop the matching design column.
    ``m`` may be a single order or a sequence; results pool over all orders
    with ``replicates`` datasets each.
    """

    m: int | tuple[int, ...] = (1, 2, 3, 4, 5)
    n: int = 100
    circle_kind: str = "great"
    beta: tuple = SCENARIOS[1]
    replicates: int = 100
    seed: int = 0
    eigenvectors: str = "known"
    alpha: float = np.pi / 4
    design_seed: int = 12345
    include_unreliable: bool = False

    def __post_init__(self):
        if self.circle_kind not in ("great", "small"):
            raise ValueError(f"circle_kind must be 'great' or 'small', got {self.circle_kind!r}")
        if self.eigenvectors not in ("known", "estimated"):
            raise ValueError(f"eigenvectors must be 'known' or 'estimated', got {self.eigenvectors!r}")
        if self.replicates < 1:
            raise ValueError("replicates must be at least 1")
        if not 1 <= self.n <= DESIGN_ROWS:
            raise ValueError(f"n must be in 1..{DESIGN_ROWS}")
        if len(self.beta) != 5 or all(b is None for b in self.beta):
            raise ValueError("beta needs five entries with at least one included")
        if min(self.orders) < 1 or max(self.orders) > MAX_M:
            raise ValueError(f"m must be in 1..{MAX_M}")

    @property
    def orders(self) -> tuple[int, ...]:
        return tuple(np.atleast_1d(self.m).astype(int).tolist())

    @property
    def active_orders(self) -> tuple[int, ...]:
        """Orders actually run; high orders with estimated circles are skipped by default."""
        if self.eigenvectors == "estimated" and not self.include_unreliable:
            return tuple(m for m in self.orders if m <= RELIABLE_M)
        return self.orders

    @property
    def columns(self) -> list[int]:
        return [j for j, b in enumerate(self.beta) if b is not None]

    @property
    def true_beta(self) -> np.ndarray:
        return np.array([self.beta[j] for j in self.columns], dtype=float)


def make_design(n: int = DESIGN_ROWS, seed: int = 12345) -> np.ndarray:
    """First ``n`` rows of a fixed 1000 x 5 design.

    Columns: a +-1 binary, a discrete uniform on 1..40, and normals with
    means 4, 6, 8; the last four are standardized over all 1000 rows.
    """
    if not 1 <= n <= DESIGN_ROWS:
        raise ValueError(f"n must be in 1..{DESIGN_ROWS}")
    rng = np.random.default_rng(seed)
    x = np.empty((DESIGN_ROWS, 5))
    x[:, 0] = rng.choice([-1.0, 1.0], DESIGN_ROWS)
    x[:, 1] = rng.integers(1, 41, DESIGN_ROWS)
    x[:, 2:] = rng.normal([4.0, 6.0, 8.0], 1.0, (DESIGN_ROWS, 3))
    tail = x[:, 1:]
    x[:, 1:] = (tail - tail.mean(axis=0)) / tail.std(axis=0)
    return x[:n]


def random_circle(m: int, kind: str, seed) -> spherefit.GreatCircleFit | spherefit.SmallCircleFit:
    """Generating circle from the moment matrix of a random NNTS sample.

    A degenerate spectrum triggers a retry with a fresh draw.
    """
    if m < 1:
        raise ValueError("m must be at least 1")
    if kind not in ("great", "small"):
        raise ValueError(f"unknown circle kind {kind!r}")
    rng = np.random.default_rng(seed)
    fitter = spherefit.fit_great_circle if kind == "great" else spherefit.fit_small_circle
    for attempt in range(MAX_CIRCLE_RETRIES):
        params = nnts.random_params(m, rng)
        e = spherefit.embed(nnts.sample(params, GENERATING_SAMPLE, rng), m)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", spherefit.DegenerateSpectrumWarning)
            fit = fitter(e)
        if not fit.degenerate:
            return fit
        logger.info("degenerate generating circle on attempt %d; redrawing", attempt + 1)
    raise RuntimeError(f"no non-degenerate circle after {MAX_CIRCLE_RETRIES} draws")


def _with_alpha(fit, alpha: float):
    if isinstance(fit, spherefit.SmallCircleFit):
        return replace(fit, alpha=float(alpha))
    return fit


def _generating_coeffs(circle, phis: np.ndarray) -> np.ndarray:
    return nnts.canonical_phase(nnts.real_to_complex(circle.point(phis)))


def simulate_dataset(config: SimConfig, m: int | None = None, seed=None):
    """One simulated dataset.

    Returns ``(thetas, x, circle, beta)`` where ``circle`` is the generating
    circle (small circles carry the configured ``alpha``).
    """
    m = config.orders[0] if m is None else m
    if seed is None:
        seed = config.seed
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    circle_ss, data_ss = ss.spawn(2)
    circle = _with_alpha(random_circle(m, config.circle_kind, circle_ss), config.alpha)
    x = make_design(config.n, config.design_seed)[:, config.columns]
    beta = config.true_beta
    phis = np.arctan(x @ beta)
    thetas = nnts.batch_sample(_generating_coeffs(circle, phis), np.random.default_rng(data_ss))
    return thetas, x, circle, beta


@dataclass
class ReplicateResult:
    m: int
    beta_hat: np.ndarray
    reject: np.ndarray
    accept_range: bool
    accept_kuiper: bool
    accept_watson: bool


def _fit_replicate(config: SimConfig, m: int, seed) -> ReplicateResult:
    thetas, x, circle, _ = simulate_dataset(config, m, seed)
    e = spherefit.embed(thetas, m)
    if config.eigenvectors == "estimated":
        if config.circle_kind == "great":
            circle = spherefit.fit_great_circle(e)
        else:
            circle = spherefit.fit_small_circle(e)
    y, branch = spherefit.to_linear(e, circle)
    ols = linmod.ols_no_intercept(x, y)
    linpred = x @ ols.beta
    if config.circle_kind == "great":
        coeffs = forecast.great_coeffs(circle, np.arctan(linpred))
    else:
        coeffs = forecast.small_coeffs(circle, linpred, branch)
    pit = goftests.pit_series(coeffs, thetas)
    return ReplicateResult(
        m=m,
        beta_hat=ols.beta,
        reject=ols.pvalues < LEVEL,
        accept_range=goftests.range_test(pit)[1] >= LEVEL,
        accept_kuiper=goftests.kuiper_test(pit)[1] >= LEVEL,
        accept_watson=goftests.watson_test(pit)[1] >= LEVEL,
    )


def _replicate_seeds(config: SimConfig):
    # one substream per (order, replicate) so results do not depend on scheduling
    root = np.random.SeedSequence(config.seed)
    jobs = []
    for m in config.active_orders:
        for r in range(config.replicates):
            jobs.append((m, np.random.SeedSequence(root.entropy, spawn_key=(m, r))))
    return jobs


def _run_job(args):
    config, m, seed = args
    try:
        return _fit_replicate(config, m, seed)
    except (ValueError, np.linalg.LinAlgError, RuntimeError) as exc:
        return f"M={m}: {exc}"


@dataclass
class StudyResult:
    """Aggregated study cell, mirroring the simulation table columns."""

    config: SimConfig
    mean_abs_beta: list
    rr: list
    ar_range: float
    ar_kuiper: float
    ar_watson: float
    completed: int
    failed: int
    failures: list = field(default_factory=list)
    skipped_orders: list = field(default_factory=list)

    def row(self) -> dict:
        out = {
            "circle": self.config.circle_kind,
            "eigenvectors": self.config.eigenvectors,
            "n": self.config.n,
            "orders": " ".join(map(str, self.config.active_orders)),
        }
        names = [f"beta{j + 1}" for j in self.config.columns]
        for name, b, r in zip(names, self.mean_abs_beta, self.rr):
            out[name] = round(b, 3)
            out[f"RR_{name}"] = round(r, 2)
        out.update(
            {
                "AR_R": round(self.ar_range, 2),
                "AR_K": round(self.ar_kuiper, 2),
                "AR_W": round(self.ar_watson, 2),
                "completed": self.completed,
                "failed": self.failed,
            }
        )
        return out


def run_study(config: SimConfig, workers: int = 1) -> StudyResult:
    """Run every replicate of ``config`` and aggregate.

    Replicates that raise are counted in ``failed`` and excluded.
    """
    jobs = [(config, m, s) for m, s in _replicate_seeds(config)]
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            results = list(pool.map(_run_job, jobs, chunksize=8))
    else:
        results = [_run_job(j) for j in jobs]
    ok = [r for r in results if isinstance(r, ReplicateResult)]
    failures = [r for r in results if isinstance(r, str)]
    if not ok:
        raise RuntimeError(f"all {len(results)} replicates failed; first error: {failures[0]}")
    betas = np.array([r.beta_hat for r in ok])
    rejects = np.array([r.reject for r in ok])
    return StudyResult(
        config=config,
        mean_abs_beta=np.mean(np.abs(betas), axis=0).tolist(),
        rr=np.mean(rejects, axis=0).tolist(),
        ar_range=float(np.mean([r.accept_range for r in ok])),
        ar_kuiper=float(np.mean([r.accept_kuiper for r in ok])),
        ar_watson=float(np.mean([r.accept_watson for r in ok])),
        completed=len(ok),
        failed=len(failures),
        failures=failures,
        skipped_orders=sorted(set(config.orders) - set(config.active_orders)),
    )


def study_csv(results: Sequence[StudyResult]) -> str:
    rows = [r.row() for r in results]
    fields: list[str] = []
    for row in rows:
        fields.extend(k for k in row if k not in fields)
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()


def study_json(results: Sequence[StudyResult]) -> str:
    def cfg(c: SimConfig) -> dict:
        d = asdict(c)
        d["m"] = list(c.orders)
        d["beta"] = list(c.beta)
        return d

    payload = [
        {"config": cfg(r.config), "row": r.row(), "failures": r.failures, "skipped_orders": r.skipped_orders}
        for r in results
    ]
    return json.dumps(payload, indent=2, sort_keys=True)
