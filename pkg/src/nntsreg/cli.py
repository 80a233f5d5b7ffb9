"""Command-line interface: ``nntsreg {fit,predict,validate,simulate,plot}``.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import tempfile
import warnings
from pathlib import Path

import numpy as np

from . import __version__, datasets, forecast, goftests, linmod, model, plots, simharness, spherefit
from .formula import FormulaError, parse_formula

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3

log = logging.getLogger("nntsreg")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def atomic_write(path: Path, text: str) -> None:
    """Write via a temporary file in the same directory and rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def parse_orders(text: str) -> list[int]:
    """``"8"``, ``"0-8"`` or ``"1,3,5"`` to a sorted list of orders."""
    out: set[int] = set()
    try:
        for part in text.split(","):
            part = part.strip()
            if "-" in part:
                lo, hi = (int(v) for v in part.split("-", 1))
                if lo > hi:
                    raise ValueError
                out.update(range(lo, hi + 1))
            else:
                out.add(int(part))
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid order list {text!r}; use e.g. 8, 0-8 or 1,3,5") from None
    if min(out) < 0:
        raise argparse.ArgumentTypeError("orders must be nonnegative")
    return sorted(out)


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n"


def _load_table(args) -> dict[str, np.ndarray]:
    if args.dataset:
        return datasets.read_csv(datasets.fixture_path(args.dataset))
    if not args.data:
        raise UsageError("one of --data or --dataset is required")
    return datasets.read_csv(args.data)


def _angles(table, args) -> np.ndarray:
    if args.angle not in table:
        raise datasets.DataError(f"no angle column {args.angle!r}; columns are {', '.join(table)}")
    units = args.units
    if units is None:
        units = "deg" if args.dataset else "rad"
    return datasets.to_radians(table[args.angle], units)


def _design(table, formula_text: str, angle: str):
    cols = [c for c in table if c != angle]
    f = parse_formula(formula_text, cols)
    return f, f.design(table)


def _load_report(path) -> dict:
    try:
        rep = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise datasets.DataError(f"cannot read report {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise datasets.DataError(f"{path}:{exc.lineno}: invalid JSON ({exc.msg})") from None
    if rep.get("schema_version") != model.SCHEMA_VERSION:
        raise datasets.DataError(f"{path}: unsupported report schema {rep.get('schema_version')!r}")
    return rep


def _pick_model(rep: dict, m: int | None) -> model.FittedModel:
    models = [model.FittedModel.from_dict(d) for d in rep["models"]]
    if m is None:
        candidates = [mdl for mdl in models if mdl.m > 0] or models
        return candidates[-1]
    for mdl in models:
        if mdl.m == m:
            return mdl
    raise UsageError(f"report has no model with M={m}; available: {', '.join(str(x.m) for x in models)}")


def _summary_line(row: dict) -> str:
    beta = " ".join(f"{b:.4f}" if b is not None else "nan" for b in row["beta"])
    alpha = f" alpha={row['alpha']:.3f}" if row.get("alpha") is not None else ""
    return (
        f"M={row['m']} {row['circle']:<7} beta=[{beta}]{alpha} loglik={row['loglik']:.3f} "
        f"range={row['p_range']:.3f} kuiper={row['p_kuiper_text']} watson={row['p_watson_text']}"
    )


# --- commands -----------------------------------------------------------------


def cmd_fit(args) -> int:
    table = _load_table(args)
    thetas = _angles(table, args)
    penalty = None
    if args.alpha_penalty is not None:
        penalty = model.Penalty(alpha=args.alpha_penalty, which=args.lambda_, seed=args.seed)
    fits = []
    if args.ar_order:
        if args.formula:
            raise UsageError("--formula and --ar-order are mutually exclusive")
        for m in args.m:
            fits.append(model.fit_ar_model(thetas, m, args.ar_order, args.circle))
    elif not args.formula:
        if any(m > 0 for m in args.m):
            raise UsageError("give a regression --formula or an --ar-order")
        fits.append(model.uniform_model(thetas))
    else:
        f, x = _design(table, args.formula, args.angle)
        for m in args.m:
            fits.append(model.fit_regression(thetas, x, m, args.circle, f.names, penalty, args.formula))
    meta = {
        "angle": args.angle,
        "circle": args.circle,
        "formula": args.formula,
        "ar_order": args.ar_order,
        "n": int(len(thetas)),
        "source": args.dataset or Path(args.data).name,
        "version": __version__,
    }
    rep = model.report(fits, meta)
    out = Path(args.out)
    atomic_write(out / "fit.json", _dump(rep))
    for row in rep["rows"]:
        print(_summary_line(row))
    return EXIT_OK


def cmd_predict(args) -> int:
    rep = _load_report(args.report)
    mdl = _pick_model(rep, args.m)
    table = _load_table(args)
    if mdl.kind == "ar":
        meta = rep.get("meta", {})
        args.angle = args.angle or meta.get("angle", "direction")
        thetas = _angles(table, args)
        e = spherefit.embed(thetas, mdl.m)
        y, _ = spherefit.to_linear(e, mdl.fit)
        k = mdl.ar_order
        # lag rows for t = k .. n; the last is the one-step-ahead forecast
        yy = np.concatenate([y, [0.0]])
        x = linmod.lag_matrix(yy, k)
        index = np.arange(k, len(y) + 1)
    elif mdl.m == 0:
        n = len(next(iter(table.values())))
        x, index = np.zeros((n, 0)), np.arange(n)
    else:
        x = parse_formula(mdl.formula, list(table)).design(table)
        index = np.arange(len(x))
    coeffs = mdl.predict_coeffs(x, branch=args.branch)
    rows = []
    for i, c in zip(index, coeffs):
        try:
            mean = float(forecast.batch_point_predict(c[None])[0])
        except forecast.ForecastError:
            mean = None
        rows.append(
            {
                "row": int(i),
                "mean_direction": mean,
                "resultant_length": float(forecast.mean_resultant_length(c[None])[0]),
                "coeffs_re": c.real.tolist(),
                "coeffs_im": c.imag.tolist(),
            }
        )
    payload = {"schema_version": model.SCHEMA_VERSION, "m": mdl.m, "circle": mdl.circle, "branch": args.branch, "forecasts": rows}
    atomic_write(Path(args.out) / "predictions.json", _dump(payload))
    print(f"wrote {len(rows)} forecasts for M={mdl.m} to {Path(args.out) / 'predictions.json'}")
    return EXIT_OK


def cmd_validate(args) -> int:
    rep = _load_report(args.report)
    table = _load_table(args)
    meta = rep.get("meta", {})
    args.angle = args.angle or meta.get("angle", "direction")
    thetas = _angles(table, args)
    results = []
    for d in rep["models"]:
        mdl = model.FittedModel.from_dict(d)
        x = None
        if mdl.kind != "ar" and mdl.m > 0:
            x = parse_formula(mdl.formula, list(table)).design(table)
        coeffs, used = model.in_sample(mdl, thetas, x)
        v = goftests.validate(coeffs, used)
        results.append(
            {
                "m": mdl.m,
                "circle": mdl.circle if mdl.m else "uniform",
                "loglik": v.loglik,
                "p_range": v.p_range,
                "p_kuiper": v.p_kuiper,
                "p_watson": v.p_watson,
                "statistics": v.statistics,
            }
        )
    adj = goftests.bh_adjust([r["p_range"] for r in results if r["m"] > 0])
    for r, a in zip([r for r in results if r["m"] > 0], adj):
        r["p_range_bh"] = float(a)
    atomic_write(Path(args.out) / "validation.json", _dump({"schema_version": model.SCHEMA_VERSION, "results": results}))
    for r in results:
        print(
            f"M={r['m']} loglik={r['loglik']:.3f} range={r['p_range']:.3f} "
            f"kuiper={r['p_kuiper']:.3f} watson={r['p_watson']:.3f}"
        )
    return EXIT_OK


def cmd_simulate(args) -> int:
    beta = simharness.SCENARIOS[args.case]
    results = []
    for n in args.n:
        cfg = simharness.SimConfig(
            m=tuple(args.m),
            n=n,
            circle_kind=args.circle,
            beta=beta,
            replicates=args.replicates,
            seed=args.seed,
            eigenvectors=args.eigenvectors,
            alpha=args.small_alpha,
            include_unreliable=args.include_unreliable,
        )
        res = simharness.run_study(cfg, workers=args.workers)
        results.append(res)
        print(", ".join(f"{k}={v}" for k, v in res.row().items()))
    out = Path(args.out)
    atomic_write(out / "study.csv", simharness.study_csv(results))
    atomic_write(out / "study.json", simharness.study_json(results) + "\n")
    return EXIT_OK


def cmd_plot(args) -> int:
    rep = _load_report(args.report)
    mdl = _pick_model(rep, args.m)
    table = _load_table(args)
    meta = rep.get("meta", {})
    args.angle = args.angle or meta.get("angle", "direction")
    thetas = _angles(table, args)
    out = Path(args.out)
    written = []

    def emit(name, svg):
        atomic_write(out / name, svg)
        written.append(name)

    if mdl.m == 0:
        emit("density.svg", plots.density_figure(np.ones((1, 1), dtype=complex), ["uniform"]))
    elif mdl.kind == "ar":
        coeffs, _ = model.in_sample(mdl, thetas)
        picks = np.unique(np.linspace(0, len(coeffs) - 1, 5).astype(int))
        emit("density.svg", plots.density_figure(coeffs[picks], [f"t={i + mdl.ar_order + 1}" for i in picks]))
        y = model.transformed_response(thetas, mdl.m, mdl.circle)
        emit("correlogram.svg", plots.correlogram_figure(y, min(args.max_lag, len(y) // 2 - 1)))
    else:
        f = parse_formula(mdl.formula, list(table))
        x = f.design(table)
        qs = np.quantile(x, [0.0, 0.25, 0.5, 0.75, 1.0], axis=0, method="nearest")
        labels = [f"{q:.0%} quantile" for q in (0.0, 0.25, 0.5, 0.75, 1.0)]
        branches = ["combined"] if mdl.circle == "great" else ["positive", "negative", "combined"]
        for br in branches:
            name = "density.svg" if br in ("combined",) else f"density_{br}.svg"
            emit(name, plots.density_figure(mdl.predict_coeffs(qs, br), labels, title=br if mdl.circle == "small" else ""))
        if len(f.variables) == 1:
            var = f.variables[0]
            grid = np.linspace(table[var].min(), table[var].max(), 201)
            gx = f.design({var: grid})
            mix = forecast.branch_mixture_moment(mdl.fit, gx @ mdl.beta) if mdl.circle == "small" else None
            emit("mean_variance.svg", plots.mean_variance_figure(grid, mdl.predict_coeffs(gx, "combined"), var, mix))
            y = model.transformed_response(thetas, mdl.m, mdl.circle)
            emit("scatter.svg", plots.scatter_figure(table[var], y, var))
    for name in written:
        print(out / name)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="nntsreg", description="Circular regression with NNTS densities.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def data_opts(sp, angle_default="direction"):
        src = sp.add_mutually_exclusive_group()
        src.add_argument("--data", help="CSV file with a header row")
        src.add_argument("--dataset", choices=["periwinkle", "wind"], help="bundled dataset (degrees)")
        sp.add_argument("--angle", default=angle_default, help="angle column (default: %(default)s)")
        sp.add_argument("--units", choices=["rad", "deg"], help="angle units (default rad; deg for bundled data)")
        sp.add_argument("--out", default=".", help="output directory (default: current)")

    fit = sub.add_parser("fit", help="fit models for one or more orders M")
    data_opts(fit)
    fit.add_argument("--m", type=parse_orders, default=[1], help="orders, e.g. 8, 0-8 or 1,3")
    fit.add_argument("--circle", choices=["great", "small"], default="great")
    fit.add_argument("--formula", help='regression terms, e.g. "I(distance<=27)*(distance-27)"')
    fit.add_argument("--ar-order", type=int, default=0, help="fit a zero-mean AR model on Y instead")
    fit.add_argument("--alpha-penalty", type=float, help="elastic-net mixing in [0, 1]; enables penalization")
    fit.add_argument("--lambda", dest="lambda_", choices=["min", "1se"], default="min")
    fit.add_argument("--seed", type=int, default=0, help="cross-validation fold seed")
    fit.set_defaults(func=cmd_fit)

    pred = sub.add_parser("predict", help="density forecasts from a fit report")
    data_opts(pred, angle_default=None)
    pred.add_argument("--report", required=True, help="fit.json from the fit command")
    pred.add_argument("--m", type=int, help="model order to use (default: highest in the report)")
    pred.add_argument("--branch", choices=["combined", "positive", "negative"], default="combined")
    pred.set_defaults(func=cmd_predict)

    val = sub.add_parser("validate", help="recompute PIT tests for every model in a report")
    data_opts(val, angle_default=None)
    val.add_argument("--report", required=True)
    val.set_defaults(func=cmd_validate)

    sim = sub.add_parser("simulate", help="run a Monte Carlo study cell")
    sim.add_argument("--case", type=int, choices=sorted(simharness.SCENARIOS), default=1)
    sim.add_argument("--n", type=parse_orders, default=[100], help="sample sizes, e.g. 100,1000")
    sim.add_argument("--m", type=parse_orders, default=[1, 2, 3, 4, 5], help="orders pooled in each cell")
    sim.add_argument("--circle", choices=["great", "small"], default="great")
    sim.add_argument("--eigenvectors", choices=["known", "estimated"], default="known")
    sim.add_argument("--replicates", type=int, default=100)
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--small-alpha", type=float, default=np.pi / 4, help="alpha of generating small circles")
    sim.add_argument("--include-unreliable", action="store_true", help="keep M > 5 with estimated circles")
    sim.add_argument("--workers", type=int, default=1)
    sim.add_argument("--out", default=".")
    sim.set_defaults(func=cmd_simulate)

    plot = sub.add_parser("plot", help="SVG figures for a fitted model")
    data_opts(plot, angle_default=None)
    plot.add_argument("--report", required=True)
    plot.add_argument("--m", type=int)
    plot.add_argument("--max-lag", type=int, default=20)
    plot.set_defaults(func=cmd_plot)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help and --version
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            return args.func(args)
    except UsageError as exc:
        print(f"nntsreg: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (np.linalg.LinAlgError, linmod.DesignError, forecast.ForecastError, FloatingPointError, RuntimeError) as exc:
        print(f"nntsreg: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (datasets.DataError, FormulaError, ValueError, KeyError) as exc:
        print(f"nntsreg: data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
