"""Command-line entry point: ``condmode gen|fit|predict|mode|benchmark``.

Exit codes: 0 success, 1 runtime or I/O failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import sys
import warnings

import numpy as np

from . import io
from .conditioning import NO_PRUNING, PruneConfig, condition
from .density import mixture_density
from .errors import DegenerateDataError, OutsideSupportError, UsageError
from .experiments import gen_ambiguous_dataset, gen_sine_dataset, run_ambiguous_experiment, run_sine_experiment
from .mode_search import SearchConfig, find_mode
from .regression import RegressorConfig, fit_kde, predict_mode, predict_nw, select_bandwidth_loo
from .rng import derive_seed


def _positive_int(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {v}")
    return v


def _seed(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _nonneg_float(text):
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not v >= 0 or not np.isfinite(v):
        raise argparse.ArgumentTypeError(f"must be a finite number >= 0, got {text}")
    return v


def _float_list(text):
    try:
        vals = [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None
    if not vals or not all(np.isfinite(vals)):
        raise argparse.ArgumentTypeError(f"expected comma-separated finite numbers, got {text!r}")
    return vals


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="condmode", description="Kernel regression by conditional mode.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a synthetic dataset CSV")
    p.add_argument("kind", choices=["sine", "ambiguous"])
    p.add_argument("--n", type=_positive_int, required=True)
    p.add_argument("--sigma", type=_nonneg_float, default=0.2, help="noise std for the sine data")
    p.add_argument("--seed", type=_seed, default=0)
    p.add_argument("--out", required=True)

    p = sub.add_parser("fit", help="fit a joint KDE to a dataset CSV")
    p.add_argument("data")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--bandwidth", type=_float_list, help="one value per column, or one value for all")
    g.add_argument("--loo-grid", type=_float_list, help="candidate bandwidths for leave-one-out selection")
    p.add_argument("--out", required=True)

    p = sub.add_parser("predict", help="predict y for given x with a fitted model")
    p.add_argument("model")
    p.add_argument("--method", choices=["mode", "nw"], default="mode")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--x", type=_float_list, action="append", help="query point, comma separated; repeatable")
    g.add_argument("--queries", help="CSV with header x1,...,x<dx>")
    p.add_argument("--q", type=_positive_int, default=1000)
    p.add_argument("--seed", type=_seed, default=0)
    p.add_argument("--no-refine", action="store_true")
    p.add_argument("--prune", type=_nonneg_float, default=1e-12, help="relative pruning threshold")
    p.add_argument("--out", help="output CSV (default: stdout)")

    p = sub.add_parser("mode", help="global mode of a mixture JSON file")
    p.add_argument("mixture")
    p.add_argument("--q", type=_positive_int, default=1000)
    p.add_argument("--seed", type=_seed, default=0)
    p.add_argument("--no-refine", action="store_true")
    p.add_argument("--out", help="output CSV (default: stdout)")

    p = sub.add_parser("benchmark", help="run a regression comparison and write reports")
    p.add_argument("experiment", choices=["sine", "ambiguous"])
    p.add_argument("--n", type=_positive_int, default=1000)
    p.add_argument("--s", type=_float_list, default=[0.1, 0.1], help="joint bandwidth x,y")
    p.add_argument("--q", type=_positive_int, default=1000)
    p.add_argument("--sigma", type=_nonneg_float, default=0.2, help="noise std for the sine data")
    p.add_argument("--queries", type=_positive_int, default=200)
    p.add_argument("--data-seed", type=_seed, default=0)
    p.add_argument("--search-seed", type=_seed, default=1)
    p.add_argument("--out", required=True, help="output directory")
    return parser


def _bandwidth_vector(values, d):
    if len(values) == 1:
        return [values[0]] * d
    if len(values) != d:
        raise UsageError(f"bandwidth needs 1 or {d} values, got {len(values)}")
    return values


def cmd_gen(args) -> int:
    if args.kind == "sine":
        data = gen_sine_dataset(args.n, args.sigma, args.seed)
    else:
        data = gen_ambiguous_dataset(args.n, args.seed)
    io.write_dataset(args.out, data)
    return 0


def cmd_fit(args) -> int:
    data = io.read_dataset(args.data)
    d = data.dx + data.dy
    if args.loo_grid is not None:
        grid = [[v] * d for v in args.loo_grid]
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            s = select_bandwidth_loo(data, grid)
        for w in caught:
            print(f"warning: {w.message}", file=sys.stderr)
        meta = {"bandwidth": [float(v) for v in s], "selection": "loo", "loo_grid": args.loo_grid}
    else:
        s = _bandwidth_vector(args.bandwidth, d)
        meta = {"bandwidth": [float(v) for v in s], "selection": "fixed"}
    io.write_model(args.out, fit_kde(data, s), meta)
    return 0


def _open_out(path):
    return open(path, "w", encoding="utf-8", newline="") if path else sys.stdout


def cmd_predict(args) -> int:
    model, _ = io.read_model(args.model)
    if args.queries:
        xs = io.read_queries(args.queries)
    else:
        xs = np.array(args.x, dtype=float) if all(len(v) == len(args.x[0]) for v in args.x) else None
    if xs is None or xs.ndim != 2 or xs.shape[1] != model.dx:
        raise UsageError(f"queries must have dimension dx = {model.dx}")
    prune = PruneConfig(args.prune)
    cfg = RegressorConfig(
        bandwidth=np.concatenate([model.x_bandwidths[0], model.y_bandwidths[0]]),
        search=SearchConfig(q=args.q, refine=not args.no_refine),
        prune=prune,
    )
    header = io.dataset_header(model.dx, model.dy) + ["density", "status"]
    failures = 0
    fh = _open_out(args.out)
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for i, x in enumerate(xs):
            try:
                if args.method == "mode":
                    y = predict_mode(model, x, cfg, derive_seed(args.seed, i))
                else:
                    y = predict_nw(model, x, prune)
                dens = mixture_density(condition(model, x, NO_PRUNING).mixture, y)
                w.writerow([io.fmt(v) for v in x] + [io.fmt(v) for v in y] + [io.fmt(dens), "ok"])
            except OutsideSupportError:
                failures += 1
                w.writerow([io.fmt(v) for v in x] + [""] * model.dy + ["", "outside_support"])
    finally:
        if fh is not sys.stdout:
            fh.close()
    if failures:
        print(f"warning: {failures} queries outside model support", file=sys.stderr)
    return 0


def cmd_mode(args) -> int:
    mix = io.read_mixture(args.mixture)
    res = find_mode(mix, SearchConfig(q=args.q, refine=not args.no_refine), args.seed)
    fh = _open_out(args.out)
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([f"y{i}" for i in range(1, mix.dim + 1)] + ["density", "best_sample_density", "ascent_iterations"])
        w.writerow(
            [io.fmt(v) for v in res.argmax]
            + [io.fmt(res.density), io.fmt(res.best_sample_density), str(res.ascent_iterations)]
        )
    finally:
        if fh is not sys.stdout:
            fh.close()
    return 0


def cmd_benchmark(args) -> int:
    if len(args.s) != 2:
        raise UsageError("--s needs two values: x and y bandwidth")
    common = dict(n=args.n, s=args.s, q=args.q, data_seed=args.data_seed, search_seed=args.search_seed, queries=args.queries)
    if args.experiment == "sine":
        report = run_sine_experiment(noise_sigma=args.sigma, **common)
    else:
        report = run_ambiguous_experiment(**common)
    for path in io.write_report(args.out, report):
        print(path)
    return 0


COMMANDS = {"gen": cmd_gen, "fit": cmd_fit, "predict": cmd_predict, "mode": cmd_mode, "benchmark": cmd_benchmark}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"{parser.prog} {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except (OSError, io.FileFormatError, DegenerateDataError, OutsideSupportError) as exc:
        print(f"{parser.prog} {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
