"""Command-line entry point.

Verbs:
  run <config> -o DIR        execute the sweep, write results/timings/summary
  bounds <config> [-o FILE]  closed-form exponent table for the configuration
  fit <results.csv>          scaling fit per scheme from a results file
  plotdata <results.csv> -o DIR [--config CFG]   plot-ready data files
  dump <config> -o DIR [--n N] [--trial T]       debug CSVs of one realization

Exit codes: 0 success, 2 configuration error, 3 runtime failure.
"""

from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

from .analysis import theoretical_bounds
from .caching import write_cache_csv
from .config import ConfigError
from .delivery import build_routes, write_routes_csv
from .experiment import (
    emit_plot_data,
    fit_scaling,
    group_outage_free,
    parse_config,
    read_results_csv,
    resolve_workers,
    run_experiment,
)
from .geometry import write_placement_csv
from .simulate import realize

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="d2dcachesim",
        description="Cache-enabled D2D network simulator and scaling harness",
    )
    sub = parser.add_subparsers(dest="verb", required=True)

    p_run = sub.add_parser("run", help="run the configured sweep")
    p_run.add_argument("config")
    p_run.add_argument("-o", "--out", default="out", help="output directory")

    p_bounds = sub.add_parser("bounds", help="print/write the exponent table")
    p_bounds.add_argument("config")
    p_bounds.add_argument("-o", "--out", default=None, help="optional CSV path")

    p_fit = sub.add_parser("fit", help="fit scaling exponents from results")
    p_fit.add_argument("results")

    p_plot = sub.add_parser("plotdata", help="emit plot-ready data files")
    p_plot.add_argument("results")
    p_plot.add_argument("-o", "--out", default="out", help="output directory")
    p_plot.add_argument(
        "--config", default=None, help="config file enabling reference lines"
    )

    p_dump = sub.add_parser("dump", help="dump one realization's internals")
    p_dump.add_argument("config")
    p_dump.add_argument("-o", "--out", default="out", help="output directory")
    p_dump.add_argument("--n", type=int, default=None, help="network size (default: first)")
    p_dump.add_argument("--trial", type=int, default=0)
    return parser


def _cmd_run(args) -> int:
    spec = parse_config(args.config)
    summary = run_experiment(spec, args.out, workers=resolve_workers())
    for w in summary.warnings:
        print(f"warning: {w}", file=sys.stderr)
    print(f"scheme: {spec.scheme}")
    print(f"trials: {len(summary.results)} over n_grid {list(spec.n_grid)}")
    if summary.fit:
        theory = "n/a" if summary.theory is None else f"{summary.theory:+.4f}"
        print(
            f"fitted slope: {summary.fit.slope:+.4f} "
            f"(stderr {summary.fit.stderr:.4f}, R^2 {summary.fit.r2:.4f}, "
            f"theory {theory})"
        )
    print(
        f"outage rates: cache-miss {summary.cache_miss_rate:.3f}, "
        f"relay-void {summary.relay_void_rate:.3f}; "
        f"mean unserved fraction {summary.mean_unserved:.4f}"
    )
    print(f"wrote {summary.out_dir}/results.csv, timings.csv, summary.csv")
    return EXIT_OK


def _cmd_bounds(args) -> int:
    spec = parse_config(args.config)
    b = theoretical_bounds(spec.alpha, spec.beta, spec.a1, spec.a2, spec.gamma)
    rows = [
        (
            b.regime,
            b.multihop_ach,
            b.multihop_conv,
            b.singlehop_ach,
            b.singlehop_conv,
            b.improved,
        )
    ]
    header = [
        "regime",
        "multihop_ach",
        "multihop_conv",
        "singlehop_ach",
        "singlehop_conv",
        "improved",
    ]
    if args.out:
        with open(args.out, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            for row in rows:
                w.writerow(["" if v is None else v for v in row])
        print(f"wrote {args.out}")
    fmt = lambda v: "zero" if v is None and b.zero_throughput else (
        "O(1/log n)" if v is None and b.log_converse else ("" if v is None else f"{v:+.4f}")
    )
    print(f"regime {b.regime}")
    print(f"  multihop:   achievable {fmt(b.multihop_ach)}, converse {fmt(b.multihop_conv)}")
    print(f"  single-hop: achievable {fmt(b.singlehop_ach)}, converse {fmt(b.singlehop_conv)}")
    if b.improved is not None:
        print(f"  improved:   achievable {b.improved:+.4f}")
    return EXIT_OK


def _cmd_fit(args) -> int:
    results = read_results_csv(args.results)
    if not results:
        raise ConfigError(f"{args.results}: empty results file")
    schemes = sorted({r.scheme for r in results})
    for scheme in schemes:
        rows = [r for r in results if r.scheme == scheme]
        fit = fit_scaling(group_outage_free(rows))
        print(
            f"{scheme}: slope {fit.slope:+.4f} "
            f"(stderr {fit.stderr:.4f}, R^2 {fit.r2:.4f}, {fit.n_points} sizes)"
        )
    return EXIT_OK


def _cmd_plotdata(args) -> int:
    results = read_results_csv(args.results)
    spec = parse_config(args.config) if args.config else None
    paths = emit_plot_data(results, args.out, spec)
    for p in paths:
        print(f"wrote {p}")
    return EXIT_OK


def _cmd_dump(args) -> int:
    spec = parse_config(args.config)
    n = args.n if args.n is not None else spec.n_grid[0]
    if n not in spec.n_grid:
        raise ConfigError(f"--n {n} not in the configured n_grid {list(spec.n_grid)}")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    real = realize(spec, n, args.trial)
    write_placement_csv(out / "geometry.csv", real.placement, real.grid)
    write_cache_csv(out / "caches.csv", real.cache)
    write_routes_csv(out / "routes.csv", build_routes(real.assignment, real.grid))
    print(f"wrote {out}/geometry.csv, caches.csv, routes.csv (n={n}, trial={args.trial})")
    return EXIT_OK


_COMMANDS = {
    "run": _cmd_run,
    "bounds": _cmd_bounds,
    "fit": _cmd_fit,
    "plotdata": _cmd_plotdata,
    "dump": _cmd_dump,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.verb](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ValueError, OSError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
