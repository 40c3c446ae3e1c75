"""Command line harness.

    srlab gen-dict --n 64 --rate 0.125 --seed 7 --out out/
    srlab bounds   --n 64 128 --rate 0.25 --k 1 2 --out out/
    srlab approx   --n 32 --M 256 --k 1 2 --trials 2000 --method omp --out out/
    srlab refine   --n 128 --rate 0.125 --stages 5 --trials 500 --out out/
    srlab quant    --n 16 --M 64 --k 1 2 4 --l 4 16 64 --out out/
    srlab sweep    --config configs/covering_probe.toml --out out/
    srlab compare  out/a.csv out/b.csv --tolerance 1e-12

Exit status is 0 on success, 1 when ``compare`` finds a deviation above
tolerance, and 2 on invalid input.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import experiments
from .core import check_seed
from .dictionary import RateSpec, random_dictionary
from .errors import ConfigError, SrlabError

SUBCOMMAND_KIND = {
    "approx": "approx-sweep",
    "bounds": "bounds-table",
    "refine": "refine-staircase",
    "quant": "quant-check",
}


def _common(p):
    p.add_argument("--config", type=Path, help="TOML experiment config")
    p.add_argument("--seed", type=int, help="unsigned 64-bit seed (overrides the config)")
    p.add_argument("--out", type=Path, default=Path("out"), help="output directory")
    p.add_argument("--threads", type=int, help="worker threads; results do not depend on it")
    p.add_argument("--format", choices=experiments.FORMATS, help="data file format")
    p.add_argument("--plot", action="store_true", help="also write an SVG line plot")


def _grid_flags(p, size=True, k=True):
    p.add_argument("--n", type=int, nargs="+")
    if size:
        g = p.add_mutually_exclusive_group()
        g.add_argument("--rate", type=float, nargs="+", help="bits per dimension; M = round(2^(nR))")
        g.add_argument("--M", type=int, nargs="+", help="dictionary sizes")
    if k:
        p.add_argument("--k", type=int, nargs="+", help="sparsity levels")


def build_parser():
    parser = argparse.ArgumentParser(prog="srlab", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-dict", help="generate a random unit-norm dictionary file")
    p.add_argument("--n", type=int, required=True)
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--rate", type=float)
    g.add_argument("--M", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", type=Path, default=Path("out"))
    p.add_argument("--name", default="dictionary.srld")

    p = sub.add_parser("approx", help="distortion estimates over a grid of (n, M, k)")
    _common(p)
    _grid_flags(p)
    p.add_argument("--trials", type=int)
    p.add_argument("--method", choices=("greedy", "omp", "exhaustive", "auto"))
    p.add_argument("--statistic", choices=("average", "worst", "both"))

    p = sub.add_parser("bounds", help="table of closed-form bounds")
    _common(p)
    _grid_flags(p)

    p = sub.add_parser("refine", help="successive-refinement rate-distortion staircase")
    _common(p)
    _grid_flags(p, k=False)
    p.add_argument("--stages", type=int)
    p.add_argument("--trials", type=int)
    p.add_argument("--mode", choices=("adaptive", "fixed"))
    p.add_argument("--d-design", type=float)

    p = sub.add_parser("quant", help="quantization of sparse representations")
    _common(p)
    p.add_argument("--n", type=int, nargs="+")
    p.add_argument("--M", type=int, nargs="+")
    p.add_argument("--k", type=int, nargs="+")
    p.add_argument("--l", type=int, nargs="+")
    p.add_argument("--trials", type=int)
    p.add_argument("--method", choices=("greedy", "omp", "exhaustive"))

    p = sub.add_parser("sweep", help="run any experiment kind from a config file")
    _common(p)

    p = sub.add_parser("compare", help="per-column relative deviation between two CSV files")
    p.add_argument("csv_a", type=Path)
    p.add_argument("csv_b", type=Path)
    p.add_argument("--tolerance", type=float, default=1e-12)
    return parser


def _raw_config(args, kind):
    raw = experiments.load_config(args.config) if args.config else {}
    if kind is not None:
        if raw.get("kind", kind) != kind:
            raise ConfigError(f"config kind {raw['kind']!r} does not match subcommand (expects {kind!r})")
        raw["kind"] = kind
    grid = dict(raw.get("grid", {}))
    for key in ("n", "rate", "M", "k", "l"):
        val = getattr(args, key, None)
        if val is not None:
            if key in ("rate", "M"):
                grid.pop("rate", None)
                grid.pop("M", None)
            grid[key] = val
    if grid:
        raw["grid"] = grid
    params = dict(raw.get("params", {}))
    for key in ("trials", "method", "statistic", "stages", "mode", "d_design"):
        val = getattr(args, key, None)
        if val is not None:
            params[key] = val
    if params:
        raw["params"] = params
    for key in ("seed", "threads", "format"):
        val = getattr(args, key, None)
        if val is not None:
            raw[key] = val
    if args.plot:
        raw["plot"] = True
    return raw


def _run_experiment(args, kind):
    if kind is None and args.config is None:
        raise ConfigError("sweep needs --config")
    cfg = experiments.validate(_raw_config(args, kind))
    result = experiments.run(cfg, args.out)
    for label, path in result["paths"].items():
        print(f"{label}: {path}")
    return 0


def _gen_dict(args):
    seed = check_seed(args.seed)
    M = RateSpec(args.n, args.rate).M if args.rate is not None else args.M
    C = random_dictionary(args.n, M, seed)
    if args.rate is not None:
        C.meta["rate"] = args.rate
    args.out.mkdir(parents=True, exist_ok=True)
    path = args.out / args.name
    C.save(path)
    print(f"dictionary: {path} (n={C.n}, M={C.M}, seed={seed})")
    return 0


def _compare(args):
    rep = experiments.compare(args.csv_a, args.csv_b, args.tolerance)
    print(json.dumps({"tolerance": rep.tolerance, "max_relative_deviation": rep.deviations,
                      "failed_columns": rep.failed, "passed": rep.passed}, indent=2))
    return 0 if rep.passed else 1


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.command == "gen-dict":
            return _gen_dict(args)
        if args.command == "compare":
            return _compare(args)
        return _run_experiment(args, SUBCOMMAND_KIND.get(args.command))
    except SrlabError as exc:
        print(f"srlab: error: {experiments.describe_error(exc)}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"srlab: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
