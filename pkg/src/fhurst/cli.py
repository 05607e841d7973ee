"""Command-line front end.

Exit codes: 0 success, 1 estimation failure, 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time

import numpy as np

from . import __version__
from .bench import BenchConfig, plot_data_csv, run_campaign, write_report
from .errors import ConfigError, ContractError, EstimationError, FHurstError, ParameterError
from .fts import LRC_METHODS, Grid, ScoreSeries, dynamic_scores, read_curve_csv, write_curve_csv
from .hurst import DESCRIPTIONS, ESTIMATORS, estimate, resolve_ids
from .sim import DEFAULT_GRID_POINTS, STRENGTHS, case_spec, simulate_farima

EXIT_OK, EXIT_ESTIMATION, EXIT_USAGE = 0, 1, 2


def _memory_param(text: str) -> float:
    try:
        d = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid number {text!r}") from None
    if not abs(d) < 0.5:
        raise argparse.ArgumentTypeError(f"d={d} lies outside the stationary range (-1/2, 1/2)")
    return d


def _positive_int(low: int):
    def parse(text: str) -> int:
        try:
            v = int(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"invalid integer {text!r}") from None
        if v < low:
            raise argparse.ArgumentTypeError(f"must be at least {low}, got {v}")
        return v

    return parse


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fhurst", description="Memory-parameter estimation for curve time series.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="simulate a functional ARFIMA panel to CSV")
    p.add_argument("--case", type=int, choices=(1, 2), required=True)
    p.add_argument("--strength", choices=STRENGTHS, required=True)
    p.add_argument("--d", type=_memory_param, required=True)
    p.add_argument("--n", type=_positive_int(10), required=True)
    p.add_argument("--grid-points", type=_positive_int(1), default=DEFAULT_GRID_POINTS)
    p.add_argument("--seed", type=_positive_int(0), default=0)
    p.add_argument("--out", required=True, help="curve CSV path; the model goes to a .json sidecar")

    p = sub.add_parser("estimate", help="estimate d and H from a curve CSV or a single-column series")
    p.add_argument("input")
    p.add_argument("--estimators", default="all", help="comma-separated ids or 'all'")
    p.add_argument("--lrc", choices=LRC_METHODS, default="lag_weighted")
    p.add_argument("--format", choices=("table", "json"), default="table")
    p.add_argument("--out", help="also write full JSON diagnostics here")

    p = sub.add_parser("bench", help="run a Monte Carlo campaign from a JSON config")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--parallelism", type=_positive_int(1))
    p.add_argument("--seed", type=_positive_int(0))
    p.add_argument("--format", choices=("csv", "json", "both"), default="both")

    sub.add_parser("list-estimators", help="list estimator ids")
    return parser


def _sidecar(path: str) -> str:
    root, ext = os.path.splitext(path)
    return (root if ext.lower() == ".csv" else path) + ".json"


def cmd_simulate(args) -> int:
    grid = Grid.uniform(args.grid_points)
    spec = case_spec(args.case, args.strength, args.d, grid, seed=args.seed)
    fs = simulate_farima(spec, args.n)
    write_curve_csv(fs, args.out)
    meta = spec.to_dict() | {"n": args.n, "burn_in_used": spec.resolved(args.n)[0], "ma_truncation_used": spec.resolved(args.n)[1]}
    with open(_sidecar(args.out), "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"wrote {args.n} curves on {grid.size} points to {args.out}", file=sys.stderr)
    return EXIT_OK


def _read_input(path):
    """Single-column files are scalar series; anything wider is a curve panel."""
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    if rows and all(len(r) == 1 for r in rows):
        try:
            float(rows[0][0])
        except ValueError:
            rows = rows[1:]
        try:
            x = np.array([float(r[0]) for r in rows])
        except ValueError as exc:
            raise ContractError(f"{path}: {exc}") from None
        return None, ScoreSeries(x, component_index=0)
    return read_curve_csv(path), None


def cmd_estimate(args) -> int:
    ids = resolve_ids(args.estimators)
    fs, scores = _read_input(args.input)
    info = {"input": "scalar"}
    if fs is not None:
        scores, info = dynamic_scores(fs, args.lrc)
        info = {"input": "functional", "n": fs.n, "grid_points": fs.grid.size, "lrc_method": args.lrc} | info
    results, failures = [], 0
    for est in ids:
        try:
            results.append(estimate(scores, est).to_dict())
        except FHurstError as exc:
            failures += 1
            results.append({"method": est, "H": None, "d": None, "error": str(exc)})
    payload = {"pipeline": info, "estimates": results}
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")
    if args.format == "json":
        json.dump(payload, sys.stdout, indent=2, sort_keys=True)
        sys.stdout.write("\n")
    else:
        print(f"{'estimator':<10} {'H':>10} {'d':>10}  note")
        for r in results:
            if r["H"] is None:
                print(f"{r['method']:<10} {'-':>10} {'-':>10}  failed: {r['error']}")
            else:
                print(f"{r['method']:<10} {r['H']:>10.4f} {r['d']:>10.4f}")
        if "h_opt" in info:
            print(f"plug-in bandwidth h_opt = {info['h_opt']:.4f}", file=sys.stderr)
    return EXIT_ESTIMATION if failures == len(ids) else EXIT_OK


def cmd_bench(args) -> int:
    config = BenchConfig.from_json_file(args.config)
    overrides = {}
    if args.parallelism is not None:
        overrides["parallelism"] = args.parallelism
    if args.seed is not None:
        overrides["seed"] = args.seed
    if overrides:
        config = BenchConfig(**(config.__dict__ | overrides))
    os.makedirs(args.out, exist_ok=True)
    start = time.perf_counter()
    report = run_campaign(config)
    wall = time.perf_counter() - start
    written = []
    if args.format in ("csv", "both"):
        written.append(_write(args.out, "report.csv", write_report(report, "csv")))
    if args.format in ("json", "both"):
        written.append(_write(args.out, "report.json", write_report(report, "json")))
    written.append(_write(args.out, "plot_data.csv", plot_data_csv(report)))
    # wall time lives apart from report.json so reruns stay byte-identical
    run_info = {"wall_time_seconds": wall, "parallelism": config.parallelism, "version": __version__}
    written.append(_write(args.out, "run_info.json", (json.dumps(run_info, indent=2) + "\n").encode()))
    from .plotting import save_report_figures

    written.extend(save_report_figures(report, args.out))
    for path in written:
        print(f"wrote {path}", file=sys.stderr)
    print(f"[bench] finished in {wall:.1f} s", file=sys.stderr)
    failed = [c for c in report.cells if c.error]
    for c in failed:
        print(f"[bench] cell failed: {c.model} {c.estimator} d={c.d:g} n={c.n}: {c.error}", file=sys.stderr)
    return EXIT_ESTIMATION if failed and len(failed) == len(report.cells) else EXIT_OK


def _write(out_dir, name, data: bytes) -> str:
    path = os.path.join(out_dir, name)
    with open(path, "wb") as fh:
        fh.write(data)
    return path


def cmd_list(args) -> int:
    for key in ESTIMATORS:
        print(f"{key:<8} {DESCRIPTIONS[key]}")
    return EXIT_OK


COMMANDS = {"simulate": cmd_simulate, "estimate": cmd_estimate, "bench": cmd_bench, "list-estimators": cmd_list}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"fhurst: config error at {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ParameterError, ContractError, OSError) as exc:
        print(f"fhurst: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except EstimationError as exc:
        print(f"fhurst: estimation failed: {exc}", file=sys.stderr)
        return EXIT_ESTIMATION


if __name__ == "__main__":
    sys.exit(main())
