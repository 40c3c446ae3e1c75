"""Experiment configs and runners behind the command line.

A config is a TOML file::

    kind = "bounds-table"      # approx-sweep | bounds-table | refine-staircase
                               # | quant-check | covering-probe
    seed = 1

    [grid]                     # every combination is one grid point
    n = [64, 128]
    rate = [0.25]              # or M = [...]
    k = [1, 2]

    [params]                   # kind-specific scalars
    trials = 1000

Every runner returns rows in deterministic grid order. Results depend only
on the config, never on the worker count.
"""
from __future__ import annotations

import csv
import io
import itertools
import json
import math
import subprocess
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__, approx, bounds, kernels, quantizer, refine
from .core import check_seed, derive_seed, draw_block, map_blocks
from .dictionary import RateSpec, random_dictionary
from .errors import ConfigError, InvalidParams, SchemaMismatch, SrlabError
from .svgplot import line_chart

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

KINDS = ("approx-sweep", "bounds-table", "refine-staircase", "quant-check", "covering-probe")

# kind -> (grid keys, {param: default}); "size" stands for either rate or M
SCHEMA = {
    "approx-sweep": (("n", "size", "k"),
                     {"trials": 1000, "method": "greedy", "statistic": "both", "work_budget": approx.DEFAULT_WORK_BUDGET}),
    "bounds-table": (("n", "size", "k"), {}),
    "refine-staircase": (("n", "size"),
                         {"trials": 500, "stages": 4, "mode": "adaptive", "d_design": None,
                          "calibration_trials": refine.CALIBRATION_TRIALS}),
    "quant-check": (("n", "M", "k", "l"), {"trials": 1000, "method": "omp"}),
    "covering-probe": (("n", "size"), {"trials": 2000, "stages": 1}),
}
FORMATS = ("csv", "json")


@dataclass
class ExperimentConfig:
    kind: str
    seed: int = 0
    grid: dict = field(default_factory=dict)
    params: dict = field(default_factory=dict)
    plot: bool = False
    threads: int = 1
    format: str = "csv"

    def to_dict(self):
        return asdict(self)


def load_config(path) -> dict:
    try:
        with open(path, "rb") as f:
            return tomllib.load(f)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def _int_list(grid, key, lo=1):
    vals = grid.get(key)
    if vals is None:
        raise ConfigError(f"grid.{key} is required")
    vals = vals if isinstance(vals, list) else [vals]
    if not vals:
        raise ConfigError(f"grid.{key} must not be empty")
    for v in vals:
        if isinstance(v, bool) or not isinstance(v, int) or v < lo:
            raise ConfigError(f"grid.{key} entries must be integers >= {lo}, got {v!r}")
    return vals


def _positive_int(params, key, lo=1):
    v = params[key]
    if isinstance(v, bool) or not isinstance(v, int) or v < lo:
        raise ConfigError(f"params.{key} must be an integer >= {lo}, got {v!r}")
    return v


def validate(raw: dict) -> ExperimentConfig:
    """Check a raw config mapping completely before anything runs."""
    raw = dict(raw)
    kind = raw.pop("kind", None)
    if kind not in KINDS:
        raise ConfigError(f"kind must be one of {KINDS}, got {kind!r}")
    keys, defaults = SCHEMA[kind]
    grid = dict(raw.pop("grid", {}) or {})
    params = dict(defaults)
    given = dict(raw.pop("params", {}) or {})
    unknown = set(given) - set(defaults)
    if unknown:
        raise ConfigError(f"unknown params for {kind}: {sorted(unknown)}")
    params.update(given)
    try:
        seed = check_seed(raw.pop("seed", 0))
    except (InvalidParams, TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    threads = raw.pop("threads", 1)
    fmt = raw.pop("format", "csv")
    plot = bool(raw.pop("plot", False))
    if raw:
        raise ConfigError(f"unknown top-level keys: {sorted(raw)}")
    if isinstance(threads, bool) or not isinstance(threads, int) or threads < 1:
        raise ConfigError(f"threads must be a positive integer, got {threads!r}")
    if fmt not in FORMATS:
        raise ConfigError(f"format must be one of {FORMATS}, got {fmt!r}")

    clean = {}
    for key in keys:
        if key == "size":
            if ("rate" in grid) == ("M" in grid):
                raise ConfigError("grid needs exactly one of rate or M")
            if "rate" in grid:
                rates = grid["rate"] if isinstance(grid["rate"], list) else [grid["rate"]]
                if not rates or any(isinstance(r, bool) or not isinstance(r, (int, float)) or r < 0 for r in rates):
                    raise ConfigError(f"grid.rate entries must be non-negative numbers, got {rates!r}")
                clean["rate"] = [float(r) for r in rates]
            else:
                clean["M"] = _int_list(grid, "M")
        else:
            clean[key] = _int_list(grid, key)
    extra = set(grid) - set(clean)
    if extra:
        raise ConfigError(f"unknown grid keys for {kind}: {sorted(extra)}")

    if "trials" in params:
        _positive_int(params, "trials", 2)
    if "stages" in params:
        _positive_int(params, "stages", 1)
    if kind == "approx-sweep":
        if params["method"] not in approx.METHODS + ("auto",):
            raise ConfigError(f"params.method must be one of {approx.METHODS + ('auto',)}")
        if params["statistic"] not in ("average", "worst", "both"):
            raise ConfigError("params.statistic must be average, worst or both")
        _positive_int(params, "work_budget")
    if kind == "quant-check" and params["method"] not in approx.METHODS:
        raise ConfigError(f"params.method must be one of {approx.METHODS}")
    if kind == "refine-staircase":
        if params["mode"] not in refine.MODES:
            raise ConfigError(f"params.mode must be one of {refine.MODES}")
        d = params["d_design"]
        if d is not None and not (isinstance(d, (int, float)) and 0 < d <= 1):
            raise ConfigError(f"params.d_design must lie in (0, 1], got {d!r}")
        _positive_int(params, "calibration_trials")
    return ExperimentConfig(kind=kind, seed=seed, grid=clean, params=params,
                            plot=plot, threads=threads, format=fmt)


def _sizes(cfg: ExperimentConfig, n):
    """(M, rate) pairs for dimension n."""
    if "rate" in cfg.grid:
        return [(RateSpec(n, r).M, r) for r in cfg.grid["rate"]]
    return [(M, math.log2(M) / n) for M in cfg.grid["M"]]


def _bounds_or_none(n, M, k):
    try:
        return bounds.report(n, M, k)
    except InvalidParams:
        return None


def run_bounds_table(cfg):
    rows = []
    for n in cfg.grid["n"]:
        for M, rate in _sizes(cfg, n):
            for k in cfg.grid["k"]:
                rep = _bounds_or_none(n, M, k)
                if rep is None:
                    raise ConfigError(f"invalid bound parameters n={n}, M={M}, k={k} (need k < n, M >= k)")
                row = {"n": n, "M": M, "rate": rate, "k": k}
                row.update({key: v for key, v in rep.as_dict().items() if key not in row})
                rows.append(row)
    return rows


def run_approx_sweep(cfg):
    p = cfg.params
    rows = []
    for n in cfg.grid["n"]:
        for M, rate in _sizes(cfg, n):
            C = random_dictionary(n, M, derive_seed(cfg.seed, n, M))
            for k in cfg.grid["k"]:
                sample_seed = derive_seed(cfg.seed, n, M, k)
                method = approx.resolve_method(C, k, p["trials"], p["method"], p["work_budget"])
                row = {"n": n, "M": M, "rate": rate, "k": k, "method": method, "trials": p["trials"],
                       "mean": None, "stderr": None, "worst_lower_estimate": None}
                if p["statistic"] in ("average", "both"):
                    row["mean"], row["stderr"] = approx.estimate_average(
                        C, k, p["trials"], method, sample_seed, cfg.threads, p["work_budget"])
                if p["statistic"] in ("worst", "both"):
                    row["worst_lower_estimate"] = approx.estimate_worst_case(
                        C, k, p["trials"], method, derive_seed(sample_seed, 1), cfg.threads, p["work_budget"])
                rep = _bounds_or_none(n, M, k)
                row["thm1_rhs"] = rep.thm1_rhs if rep else None
                row["thm2_lower"] = rep.thm2_lower if rep else None
                rows.append(row)
    return rows


def run_covering_probe(cfg):
    p = cfg.params
    rows = []
    for n in cfg.grid["n"]:
        for M, rate in _sizes(cfg, n):
            C = random_dictionary(n, M, derive_seed(cfg.seed, n, M))
            ratios = approx.contraction_ratios(C, p["stages"], p["trials"], derive_seed(cfg.seed, n, M, 1),
                                               "sphere", cfg.threads)
            for j in range(p["stages"]):
                r = ratios[:, j]
                rows.append({"n": n, "M": M, "rate": rate, "stage": j + 1, "trials": p["trials"],
                             "mean_ratio": float(np.mean(r)),
                             "stderr": float(np.std(r, ddof=1) / math.sqrt(r.size)),
                             "mean_log2_ratio": float(np.mean(np.log2(r))),
                             "asymptotic_ratio": 2.0 ** (-2.0 * rate),
                             "gap": float(np.mean(r)) - 2.0 ** (-2.0 * rate)})
    return rows


def run_refine_staircase(cfg):
    p = cfg.params
    rows = []
    for n in cfg.grid["n"]:
        for M, rate in _sizes(cfg, n):
            C = random_dictionary(n, M, derive_seed(cfg.seed, n, M))
            d = p["d_design"]
            if p["mode"] == "fixed" and d is None:
                d = refine.calibrate_design_distortion(C, p["calibration_trials"],
                                                       derive_seed(cfg.seed, n, M, 3), cfg.threads)
            reports = refine.rd_staircase(n, M, p["stages"], p["trials"], derive_seed(cfg.seed, n, M, 2),
                                          p["mode"], d, cfg.threads, dictionary=C)
            for r in reports:
                rows.append({"n": n, "M": M, "mode": p["mode"], "stage": r.stage, "bits": r.cumulative_bits,
                             "rate_per_dim": r.rate_per_dim, "mean_dist": r.mean_dist,
                             "ideal_dist": r.ideal_dist, "stderr": r.stderr, "trials": r.trials,
                             "side_bits": r.side_bits, "target": r.target,
                             "d_design": d if p["mode"] == "fixed" else None})
    return rows


def _quant_block(C, k, l, method, y_block):
    out = np.empty((len(y_block), 4))
    for i, y in enumerate(y_block):
        rep = approx.represent(y, C, k, method)
        o = quantizer.ortho_decompose(y, rep, C)
        q = quantizer.scalar_quantize(o, l)
        yhat = o.projection
        err = q.error_sq(o)
        lhs = float((y - q.recon_q) @ (y - q.recon_q))
        rhs = float((y - yhat) @ (y - yhat)) + err
        out[i] = (err, quantizer.check_orthogonality(y, o, q) / max(math.sqrt(float(y @ y)), 1e-300),
                  abs(lhs - rhs) / max(lhs, 1e-300), o.k)
    return out


def run_quant_check(cfg):
    p = cfg.params
    rows = []
    for n in cfg.grid["n"]:
        for M in cfg.grid["M"]:
            C = random_dictionary(n, M, derive_seed(cfg.seed, n, M))
            for k in cfg.grid["k"]:
                for l in cfg.grid["l"]:
                    seed = derive_seed(cfg.seed, n, M, k, l)
                    stats = np.concatenate(map_blocks(
                        lambda b, s, e: _quant_block(C, k, l, p["method"], draw_block("ball", n, seed, b, e - s)),
                        p["trials"], cfg.threads))
                    err = stats[:, 0]
                    k_eff = stats[:, 3]
                    rows.append({"n": n, "M": M, "k": k, "l": l, "method": p["method"], "trials": p["trials"],
                                 "mean_err": float(np.mean(err)),
                                 "stderr": float(np.std(err, ddof=1) / math.sqrt(err.size)),
                                 "max_err": float(np.max(err)),
                                 "max_err_over_nearest_bound": float(np.max(err / (k_eff / (4.0 * l * l)))),
                                 "nearest_bound": k / (4.0 * l * l), "step_bound": k / (l * l),
                                 "max_orth_rel": float(np.max(stats[:, 1])),
                                 "max_pythagoras_rel": float(np.max(stats[:, 2])),
                                 "log2_descriptions": bounds.log2_binom(M, k) + k * math.log2(2 * l + 1)})
    return rows


RUNNERS = {
    "approx-sweep": run_approx_sweep,
    "bounds-table": run_bounds_table,
    "refine-staircase": run_refine_staircase,
    "quant-check": run_quant_check,
    "covering-probe": run_covering_probe,
}

# kind -> (x column, y column, y transform label, series key columns)
PLOTS = {
    "approx-sweep": ("k", "mean", "log2 mean distortion", ("n", "M")),
    "bounds-table": ("n", "thm2_lower", "log2 converse bound", ("k",)),
    "refine-staircase": ("rate_per_dim", "mean_dist", "log2 mean distortion per dimension", ("n", "M")),
    "quant-check": ("l", "max_err", "log2 max quantization error", ("k",)),
    "covering-probe": ("n", "mean_ratio", "log2 mean contraction ratio", ("stage",)),
}


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def rows_to_csv(rows) -> str:
    if not rows:
        return ""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(list(rows[0]))
    for r in rows:
        w.writerow([_fmt(v) for v in r.values()])
    return buf.getvalue()


def plot_rows(kind, rows) -> str:
    x, y, label, keys = PLOTS[kind]
    series = {}
    for r in rows:
        if r.get(y) is None or r[y] <= 0:
            continue
        name = ", ".join(f"{key}={r[key]}" for key in keys)
        series.setdefault(name, []).append((r[x], math.log2(r[y])))
    if kind == "refine-staircase":
        ideal = sorted({(r["rate_per_dim"], -2.0 * r["rate_per_dim"]) for r in rows})
        series["ideal 2^(-2R)"] = ideal
    return line_chart(series, xlabel=x, ylabel=label, title=kind)


def git_describe() -> str:
    try:
        res = subprocess.run(["git", "describe", "--always", "--dirty", "--tags"], capture_output=True,
                             text=True, cwd=Path(__file__).resolve().parent, timeout=10)
    except (OSError, subprocess.SubprocessError):
        return "unknown"
    return res.stdout.strip() or "unknown"


def run(cfg: ExperimentConfig, out_dir, stem=None) -> dict:
    """Run ``cfg`` and write ``<stem>.csv|json``, ``<stem>.meta.json`` and, if asked, ``<stem>.svg``."""
    stem = stem or cfg.kind
    started = time.time()
    rows = RUNNERS[cfg.kind](cfg)
    wall = time.time() - started
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {}
    if cfg.format == "csv":
        paths["data"] = out / f"{stem}.csv"
        paths["data"].write_text(rows_to_csv(rows))
    else:
        paths["data"] = out / f"{stem}.json"
        paths["data"].write_text(json.dumps(rows, indent=2, default=float) + "\n")
    if cfg.plot:
        paths["plot"] = out / f"{stem}.svg"
        paths["plot"].write_text(plot_rows(cfg.kind, rows))
    meta = {
        "config": cfg.to_dict(),
        "seed": cfg.seed,
        "version": __version__,
        "git_describe": git_describe(),
        "kernel_backend": kernels.BACKEND,
        "rows": len(rows),
        "started_unix": started,
        "wall_time_s": wall,
        "notes": ["logarithms are base 2; rates are bits per dimension",
                  "thm2_lower is an asymptotic bound evaluated at finite n",
                  "worst_lower_estimate is a Monte Carlo maximum over unit-sphere draws; "
                  "it never exceeds the true worst case"],
    }
    paths["meta"] = out / f"{stem}.meta.json"
    paths["meta"].write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    return {"rows": rows, "paths": paths, "meta": meta}


@dataclass
class CompareReport:
    deviations: dict
    tolerance: float
    failed: list

    @property
    def passed(self) -> bool:
        return not self.failed


def _num(s):
    try:
        return float(s)
    except ValueError:
        return None


def compare(csv_a, csv_b, tolerance) -> CompareReport:
    """Per-column maximum relative deviation between two CSV files with identical schemas."""
    with open(csv_a, newline="") as fa, open(csv_b, newline="") as fb:
        a = list(csv.reader(fa))
        b = list(csv.reader(fb))
    if not a or not b or a[0] != b[0]:
        raise SchemaMismatch(f"headers differ: {a[0] if a else []} vs {b[0] if b else []}")
    if len(a) != len(b):
        raise SchemaMismatch(f"row counts differ: {len(a) - 1} vs {len(b) - 1}")
    header = a[0]
    dev = {c: 0.0 for c in header}
    for ra, rb in zip(a[1:], b[1:]):
        if len(ra) != len(header) or len(rb) != len(header):
            raise SchemaMismatch("ragged row")
        for c, va, vb in zip(header, ra, rb):
            if va == vb:
                continue
            xa, xb = _num(va), _num(vb)
            if xa is None or xb is None:
                d = math.inf
            else:
                scale = max(abs(xa), abs(xb))
                d = abs(xa - xb) / scale if scale > 0 else 0.0
            dev[c] = max(dev[c], d)
    failed = [c for c in header if dev[c] > tolerance]
    return CompareReport(dev, float(tolerance), failed)


def describe_error(exc: SrlabError) -> str:
    return f"{type(exc).__name__}: {exc}"
