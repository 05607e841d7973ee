"""Monte Carlo campaigns: bias, variance and MSE of d-estimates.

Each replication simulates one functional ARFIMA panel, extracts the first
dynamic principal component scores and runs every requested estimator on
the same scores.  Seeds are derived from ``(seed, case, strength, d, n,
replication)`` through ``numpy.random.SeedSequence`` so any cell can be
re-run on its own and results do not depend on scheduling.
"""

from __future__ import annotations

import csv
import io
import json
import math
import sys
from importlib import resources
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import __version__
from .errors import ConfigError, FHurstError
from .fts import LRC_METHODS, Grid, dynamic_scores
from .hurst import ESTIMATORS, estimate
from .sim import DEFAULT_GRID_POINTS, STRENGTHS, case_spec, simulate_farima

DEFAULT_D_VALUES = (0.05, 0.10, 0.15, 0.20, 0.25, 0.30, 0.35, 0.40)
DEFAULT_N_VALUES = (250, 500, 1000)
CSV_COLUMNS = ("model", "estimator", "d", "n", "bias", "variance", "mse", "mse_x100", "B_eff", "failures")


def model_name(model: dict) -> str:
    return f"case{model['case']}-{model['strength']}"


@dataclass(frozen=True)
class BenchConfig:
    models: tuple = ({"case": 1, "strength": "moderate"},)
    d_values: tuple = DEFAULT_D_VALUES
    n_values: tuple = DEFAULT_N_VALUES
    B: int = 1000
    estimators: tuple = tuple(ESTIMATORS)
    lrc_method: str = "lag_weighted"
    parallelism: int = 1
    seed: int = 20190101
    grid_points: int = DEFAULT_GRID_POINTS

    @classmethod
    def from_dict(cls, raw) -> "BenchConfig":
        """Validate a decoded JSON config; errors name the offending field."""
        if not isinstance(raw, dict):
            raise ConfigError("<root>", "config must be a JSON object")
        known = set(cls.__dataclass_fields__)
        for key in raw:
            if key not in known:
                raise ConfigError(key, "unknown field")
        kw = {}
        if "models" in raw:
            models = raw["models"]
            if not isinstance(models, list) or not models:
                raise ConfigError("models", "must be a non-empty list")
            parsed = []
            for i, m in enumerate(models):
                path = f"models[{i}]"
                if not isinstance(m, dict):
                    raise ConfigError(path, "must be an object with 'case' and 'strength'")
                if m.get("case") not in (1, 2):
                    raise ConfigError(f"{path}.case", "must be 1 or 2")
                if m.get("strength") not in STRENGTHS:
                    raise ConfigError(f"{path}.strength", f"must be one of {list(STRENGTHS)}")
                extra = set(m) - {"case", "strength"}
                if extra:
                    raise ConfigError(f"{path}.{sorted(extra)[0]}", "unknown field")
                parsed.append({"case": m["case"], "strength": m["strength"]})
            kw["models"] = tuple(parsed)
        if "d_values" in raw:
            kw["d_values"] = tuple(_number_list(raw["d_values"], "d_values"))
            for i, d in enumerate(kw["d_values"]):
                if not abs(d) < 0.5:
                    raise ConfigError(f"d_values[{i}]", "must lie in (-1/2, 1/2)")
        if "n_values" in raw:
            ns = _number_list(raw["n_values"], "n_values")
            for i, n in enumerate(ns):
                if n != int(n) or n < 64:
                    raise ConfigError(f"n_values[{i}]", "must be an integer >= 64")
            kw["n_values"] = tuple(int(n) for n in ns)
        for key, low in (("B", 2), ("parallelism", 1), ("grid_points", 2)):
            if key in raw:
                v = raw[key]
                if not isinstance(v, int) or isinstance(v, bool) or v < low:
                    raise ConfigError(key, f"must be an integer >= {low}")
                kw[key] = v
        if "seed" in raw:
            if not isinstance(raw["seed"], int) or isinstance(raw["seed"], bool) or raw["seed"] < 0:
                raise ConfigError("seed", "must be a non-negative integer")
            kw["seed"] = raw["seed"]
        if "estimators" in raw:
            ests = raw["estimators"]
            if ests == "all":
                ests = list(ESTIMATORS)
            if not isinstance(ests, list) or not ests:
                raise ConfigError("estimators", "must be a non-empty list of ids or 'all'")
            for i, e in enumerate(ests):
                if e not in ESTIMATORS:
                    raise ConfigError(f"estimators[{i}]", f"unknown estimator {e!r}")
            kw["estimators"] = tuple(ests)
        if "lrc_method" in raw:
            if raw["lrc_method"] not in LRC_METHODS:
                raise ConfigError("lrc_method", f"must be one of {list(LRC_METHODS)}")
            kw["lrc_method"] = raw["lrc_method"]
        return cls(**kw)

    @classmethod
    def from_json_file(cls, path) -> "BenchConfig":
        try:
            with open(path) as fh:
                raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError("<root>", f"invalid JSON ({exc})") from None
        return cls.from_dict(raw)

    def to_dict(self) -> dict:
        out = asdict(self)
        for k, v in out.items():
            if isinstance(v, tuple):
                out[k] = list(v)
        return out


def shipped_configs() -> list:
    """Names of the campaign configs bundled with the package."""
    return sorted(p.name[:-5] for p in resources.files("fhurst.configs").iterdir() if p.name.endswith(".json"))


def shipped_config_path(name: str):
    """Filesystem path of a bundled config such as ``"full_campaign"``."""
    ref = resources.files("fhurst.configs") / f"{name}.json"
    if not ref.is_file():
        raise ConfigError("<name>", f"no shipped config {name!r}; available: {shipped_configs()}")
    return ref


def _number_list(v, name):
    if not isinstance(v, list) or not v:
        raise ConfigError(name, "must be a non-empty list of numbers")
    for i, x in enumerate(v):
        if not isinstance(x, (int, float)) or isinstance(x, bool):
            raise ConfigError(f"{name}[{i}]", "must be a number")
    return v


@dataclass(frozen=True)
class CellResult:
    model: str
    estimator: str
    d: float
    n: int
    bias: float
    variance: float
    mse: float
    B_effective: int
    failure_count: int
    error: str | None = None

    @property
    def mse_x100(self) -> float:
        return 100 * self.mse


@dataclass(frozen=True)
class OverallRow:
    model: str
    estimator: str
    n: int
    bias: float
    variance: float
    mse: float

    @property
    def mse_x100(self) -> float:
        return 100 * self.mse


@dataclass
class BenchReport:
    cells: list = field(default_factory=list)
    overall: list = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    def cell(self, model, estimator, d, n) -> CellResult:
        for c in self.cells:
            if c.model == model and c.estimator == estimator and c.n == n and abs(c.d - d) < 1e-12:
                return c
        raise KeyError((model, estimator, d, n))

    def overall_row(self, model, estimator, n) -> OverallRow:
        for r in self.overall:
            if r.model == model and r.estimator == estimator and r.n == n:
                return r
        raise KeyError((model, estimator, n))


def summarize(d_hats, d: float):
    """Bias (d minus mean estimate), variance (divisor B-1) and MSE (divisor B)."""
    x = np.asarray(d_hats, dtype=float)
    b = x.size
    bias = float(np.sum(d - x) / b)
    variance = float(np.sum((x - x.mean()) ** 2) / (b - 1)) if b > 1 else float("nan")
    mse = float(np.sum((x - d) ** 2) / b)
    return bias, variance, mse


def cell_from_estimates(model, estimator, d, n, d_hats, failures=0) -> CellResult:
    """Aggregate replication estimates (NaN marks a failed replication)."""
    x = np.asarray(d_hats, dtype=float)
    ok = x[np.isfinite(x)]
    failures = int(failures) + int(x.size - ok.size)
    if ok.size == 0:
        nan = float("nan")
        return CellResult(model, estimator, float(d), int(n), nan, nan, nan, 0, failures, "all replications failed")
    bias, variance, mse = summarize(ok, d)
    return CellResult(model, estimator, float(d), int(n), bias, variance, mse, int(ok.size), failures)


def replication_seed(seed: int, model: dict, d: float, n: int, rep: int) -> np.random.SeedSequence:
    key = (int(model["case"]), STRENGTHS.index(model["strength"]), int(round(d * 1e6)), int(n), int(rep))
    return np.random.SeedSequence(seed, spawn_key=key)


def replicate(config: BenchConfig, model: dict, d: float, n: int, rep: int) -> np.ndarray:
    """One replication: simulate, extract scores, estimate d with every estimator.

    Failed estimators yield NaN.
    """
    grid = Grid.uniform(config.grid_points)
    spec = case_spec(model["case"], model["strength"], d, grid)
    rng = np.random.default_rng(replication_seed(config.seed, model, d, n, rep))
    fs = simulate_farima(spec, n, rng)
    out = np.full(len(config.estimators), np.nan)
    try:
        scores, _ = dynamic_scores(fs, config.lrc_method)
    except FHurstError:
        return out
    for i, est in enumerate(config.estimators):
        try:
            out[i] = estimate(scores, est).d
        except FHurstError:
            pass
    return out


def _replicate_chunk(args):
    config, tasks = args
    return [replicate(config, *t) for t in tasks]


def run_cell(config: BenchConfig, model: dict, d: float, n: int, replications=None) -> list:
    """All estimators' CellResults for one (model, d, n) cell."""
    reps = range(config.B) if replications is None else replications
    est = np.array([replicate(config, model, d, n, r) for r in reps])
    return [cell_from_estimates(model_name(model), e, d, n, est[:, i]) for i, e in enumerate(config.estimators)]


def overall_rows(cells) -> list:
    """Mean of bias, variance and MSE across the d-cells of each (model, estimator, n)."""
    groups = {}
    for c in cells:
        groups.setdefault((c.model, c.estimator, c.n), []).append(c)
    rows = []
    for (m, e, n), cs in groups.items():
        rows.append(
            OverallRow(
                m, e, n,
                float(np.mean([c.bias for c in cs])),
                float(np.mean([c.variance for c in cs])),
                float(np.mean([c.mse for c in cs])),
            )
        )
    return rows


def run_campaign(config: BenchConfig, progress=None) -> BenchReport:
    """Run every (model, d, n) cell; parallelism splits replications across processes."""
    if progress is None:
        progress = sys.stderr
    cells_keys = [(m, d, n) for m in config.models for n in config.n_values for d in config.d_values]
    tasks = [(m, d, n, r) for (m, d, n) in cells_keys for r in range(config.B)]
    if config.parallelism > 1 and len(tasks) > 1:
        chunk = max(1, math.ceil(len(tasks) / (config.parallelism * 8)))
        batches = [tasks[i : i + chunk] for i in range(0, len(tasks), chunk)]
        with ProcessPoolExecutor(max_workers=config.parallelism) as pool:
            results = []
            for i, res in enumerate(pool.map(_replicate_chunk, [(config, b) for b in batches])):
                results.extend(res)
                if progress:
                    print(f"[bench] {min((i + 1) * chunk, len(tasks))}/{len(tasks)} replications", file=progress)
    else:
        results = []
        for i, t in enumerate(tasks):
            results.append(replicate(config, *t))
            if progress and (i + 1) % max(1, config.B) == 0:
                m, d, n, _ = t
                print(f"[bench] {model_name(m)} n={n} d={d:g} done ({i + 1}/{len(tasks)})", file=progress)
    buffer = np.array(results).reshape(len(cells_keys), config.B, len(config.estimators))
    cells = []
    for (m, d, n), est in zip(cells_keys, buffer):
        for j, e in enumerate(config.estimators):
            cells.append(cell_from_estimates(model_name(m), e, d, n, est[:, j]))
    metadata = {
        # parallelism is left out so reports are identical across worker counts
        "config": {k: v for k, v in config.to_dict().items() if k != "parallelism"},
        "grid_points": config.grid_points,
        "lrc_method": config.lrc_method,
        "replications": config.B,
        "seed": config.seed,
        "seed_derivation": "SeedSequence(seed, spawn_key=(case, strength index, round(d*1e6), n, replication))",
        "rng": "numpy PCG64 (default_rng), standard_normal",
        "tuning": {
            "block_grid": "30 log-spaced sizes from 4 (DFA 8) to n//4",
            "lw_bandwidth": "floor(n**0.65)",
            "gph_bandwidth": "floor(sqrt(n))",
            "sgph_truncation": "floor(n**0.9)",
            "taper_order": 2,
            "burn_in": "n",
            "ma_truncation": "n + 100",
        },
        "version": __version__,
    }
    return BenchReport(cells, overall_rows(cells), metadata)


# ---------------------------------------------------------------------------
# serialisation


def _fmt(v) -> str:
    if isinstance(v, float):
        return "nan" if math.isnan(v) else f"{v:.17g}"
    return str(v)


def _num(v):
    return None if isinstance(v, float) and not math.isfinite(v) else v


def report_to_dict(report: BenchReport) -> dict:
    return {
        "metadata": report.metadata,
        "cells": [{k: _num(v) for k, v in asdict(c).items()} | {"mse_x100": _num(c.mse_x100)} for c in report.cells],
        "overall": [{k: _num(v) for k, v in asdict(r).items()} | {"mse_x100": _num(r.mse_x100)} for r in report.overall],
    }


def _float(v):
    return float("nan") if v is None else float(v)


def report_from_dict(raw: dict) -> BenchReport:
    cells = [
        CellResult(
            c["model"], c["estimator"], float(c["d"]), int(c["n"]), _float(c["bias"]),
            _float(c["variance"]), _float(c["mse"]), int(c["B_effective"]), int(c["failure_count"]), c.get("error"),
        )
        for c in raw.get("cells", [])
    ]
    overall = [
        OverallRow(r["model"], r["estimator"], int(r["n"]), _float(r["bias"]), _float(r["variance"]), _float(r["mse"]))
        for r in raw.get("overall", [])
    ]
    return BenchReport(cells, overall, raw.get("metadata", {}))


def write_report(report: BenchReport, fmt: str = "csv") -> bytes:
    """Serialise a report.  CSV holds one row per cell followed by the
    per-(model, estimator, n) overall rows with ``d = overall``."""
    if fmt == "json":
        return (json.dumps(report_to_dict(report), indent=2, sort_keys=True) + "\n").encode()
    if fmt != "csv":
        raise ValueError(f"unknown report format {fmt!r}")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for c in report.cells:
        w.writerow([c.model, c.estimator, _fmt(c.d), c.n, _fmt(c.bias), _fmt(c.variance),
                    _fmt(c.mse), _fmt(c.mse_x100), c.B_effective, c.failure_count])
    for r in report.overall:
        w.writerow([r.model, r.estimator, "overall", r.n, _fmt(r.bias), _fmt(r.variance),
                    _fmt(r.mse), _fmt(r.mse_x100), "", ""])
    return buf.getvalue().encode()


def read_report_json(data) -> BenchReport:
    if isinstance(data, bytes):
        data = data.decode()
    return report_from_dict(json.loads(data))


def plot_data_csv(report: BenchReport) -> bytes:
    """Long-format table for plotting: x = d, series = estimator, facet = n."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("model", "facet_n", "series", "x_d", "bias", "variance", "mse_x100"))
    for c in report.cells:
        w.writerow([c.model, c.n, c.estimator, _fmt(c.d), _fmt(c.bias), _fmt(c.variance), _fmt(c.mse_x100)])
    return buf.getvalue().encode()
