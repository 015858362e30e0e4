"""Seeded Monte Carlo experiments for the fast balancing rule.

An experiment is a pure function of its :class:`ExperimentConfig`.  Each
replication draws its instance from ``derive_seed(base_seed, rep_index)``,
so the records (and the CSV written from them) do not depend on how many
worker processes ran the replications.  Means are accumulated with
``math.fsum`` over records sorted by replication index.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from functools import lru_cache
from pathlib import Path

import numpy as np

from . import analysis
from .balancing import BalancingConfig, classic_index, fast_index, functional_b
from .errors import ConstraintViolation, LepskijError, NoBalancePoint, NoFastPoint
from .estimator import SolutionPath, error_sq, expected_error_curve, prior_tail
from .model import UINT64_MAX, ModelParams, derive_seed, draw_problem, draw_split
from .noise import ANALYTIC, SPLIT, NoiseBehavior, canonical_mode
from .schedule import Grid, lookahead

RULES = ("fast", "classic", "both")
CSV_FIELDS = ("rep_index", "seed", "n_fb", "n_star", "n_opt", "err_sq_selected",
              "min_expected_err_sq", "ratio", "evaluations")
# neglected prior mass beyond k_max, relative to the smallest expected error
SURROGATE_TOLERANCE = 1e-3


class ReportError(LepskijError, OSError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    params: ModelParams
    k_max: int
    balancing: BalancingConfig = BalancingConfig()
    reps: int = 1000
    base_seed: int = 0
    rho_mode: str = ANALYTIC
    rule: str = "fast"
    n_max: int | None = None
    outlier_threshold: int = 3
    tail_pairs: tuple = ()
    workers: int = 1
    output_format: str = "csv"
    output_path: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "rho_mode", canonical_mode(self.rho_mode))
        object.__setattr__(self, "tail_pairs",
                           tuple((int(n), float(t)) for n, t in self.tail_pairs))
        if self.reps < 1:
            raise ConstraintViolation("reps", f"reps must be >= 1, got {self.reps}")
        if not 0 <= self.base_seed <= UINT64_MAX:
            raise ConstraintViolation("base_seed", "base_seed must be an unsigned 64-bit integer")
        if self.rule not in RULES:
            raise ConstraintViolation("rule", f"rule must be one of {RULES}, got {self.rule!r}")
        if self.output_format not in ("csv", "json"):
            raise ConstraintViolation("output_format", f"unknown format {self.output_format!r}")
        if self.workers < 1:
            raise ConstraintViolation("workers", "workers must be >= 1")
        grid = self.grid
        for n, tau in self.tail_pairs:
            grid.check_level(n)
            if not tau > 0:
                raise ConstraintViolation("tail_pairs", f"tail threshold must be > 0, got {tau}")
        curve = expected_error_curve(self.params, grid)
        neglected = prior_tail(self.params.eta, self.params.gamma, self.k_max + 1)
        if neglected >= SURROGATE_TOLERANCE * curve.min():
            raise ConstraintViolation(
                "k_max", f"prior mass beyond k_max ({neglected:.3g}) is not below "
                         f"{SURROGATE_TOLERANCE} x min expected error ({curve.min():.3g})")

    @property
    def grid(self) -> Grid:
        return Grid.for_params(self.params, self.k_max, self.n_max)

    def to_dict(self) -> dict:
        return {
            "params": self.params.to_dict(),
            "k_max": self.k_max,
            "balancing": asdict(self.balancing),
            "reps": self.reps,
            "base_seed": self.base_seed,
            "rho_mode": self.rho_mode,
            "rule": self.rule,
            "n_max": self.n_max,
            "outlier_threshold": self.outlier_threshold,
            "tail_pairs": [list(p) for p in self.tail_pairs],
            "workers": self.workers,
            "outputs": {"format": self.output_format, "path": self.output_path},
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        raw = dict(raw)
        known = {f.name for f in fields(cls)} | {"outputs"}
        unknown = set(raw) - known
        if unknown:
            raise ConstraintViolation("config", f"unknown config keys: {sorted(unknown)}")
        try:
            params = ModelParams.from_dict(raw.pop("params"))
            balancing = BalancingConfig(**raw.pop("balancing", {}))
            outputs = raw.pop("outputs", {}) or {}
            if "format" in outputs:
                raw["output_format"] = outputs["format"]
            if "path" in outputs:
                raw["output_path"] = outputs["path"]
            return cls(params=params, balancing=balancing, **raw)
        except (KeyError, TypeError) as exc:
            raise ConstraintViolation("config", f"malformed config: {exc}") from exc

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ReportError(f"cannot read config {path}: {exc}") from exc
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConstraintViolation("config", f"{path} is not valid JSON: {exc}") from exc
        return cls.from_dict(raw)

    def with_overrides(self, **changes) -> "ExperimentConfig":
        """Copy with top-level fields or ``sigma``/``kappa``/``tau``/``delta`` replaced."""
        changes = {k: v for k, v in changes.items() if v is not None}
        bal = {k: changes.pop(k) for k in ("sigma", "kappa", "tau") if k in changes}
        par = {k: changes.pop(k) for k in ("delta", "eta") if k in changes}
        cfg = self
        if bal:
            cfg = replace(cfg, balancing=replace(cfg.balancing, **bal))
        if par:
            cfg = replace(cfg, params=cfg.params.replace(**par))
        return replace(cfg, **changes) if changes else cfg


@dataclass(frozen=True)
class _Context:
    grid: Grid
    curve: tuple
    n_opt: int
    min_expected: float
    K: int
    rho_analytic: tuple


@lru_cache(maxsize=32)
def _context(params: ModelParams, k_max: int, n_max, sigma: float) -> _Context:
    grid = Grid.for_params(params, k_max, n_max)
    curve = expected_error_curve(params, grid)
    rho = NoiseBehavior(ANALYTIC, grid, params)
    gaps = [lookahead(grid, n, sigma, rho) - n for n in range(grid.n_max)]
    return _Context(grid, tuple(curve), int(np.argmin(curve)), float(curve.min()),
                    max(gaps, default=0), tuple(rho.values))


def context(config: ExperimentConfig) -> _Context:
    return _context(config.params, config.k_max, config.n_max, config.balancing.sigma)


@dataclass
class ReplicationRecord:
    rep_index: int
    seed: int
    n_fb: int | None
    n_star: int | None
    n_opt: int
    err_sq_selected: float | None
    min_expected_err_sq: float
    ratio: float | None
    evaluations: int
    lookahead_gap: int | None = None
    failure: str | None = None
    tail_b: dict = field(default_factory=dict)
    rho_trace: tuple | None = None

    def csv_row(self) -> list:
        return ["" if getattr(self, f) is None else repr(getattr(self, f)) for f in CSV_FIELDS]


def _instance_and_rho(config: ExperimentConfig, grid: Grid, seed: int):
    if config.rho_mode == SPLIT:
        split = draw_split(config.params, config.k_max, seed)
        return split.averaged(), NoiseBehavior(SPLIT, grid, split=split)
    inst = draw_problem(config.params, config.k_max, seed)
    return inst, NoiseBehavior(config.rho_mode, grid, config.params)


def run_replication(config: ExperimentConfig, rep_index: int) -> ReplicationRecord:
    ctx = context(config)
    grid = ctx.grid
    seed = derive_seed(config.base_seed, rep_index)
    inst, rho = _instance_and_rho(config, grid, seed)

    n_fb = n_star = gap = failure = None
    evaluations = 0
    if config.rule in ("fast", "both"):
        path = SolutionPath(inst, grid)
        try:
            res = fast_index(path, config.balancing, rho)
            n_fb, gap = res.index, res.max_gap
        except NoFastPoint as exc:
            failure = f"NoFastPoint: {exc}"
        evaluations = path.evaluations
    if config.rule in ("classic", "both"):
        path = SolutionPath(inst, grid)
        try:
            n_star = classic_index(path, config.balancing, rho).index
        except NoBalancePoint as exc:
            failure = failure or f"NoBalancePoint: {exc}"
        if config.rule == "classic":
            evaluations = path.evaluations

    selected = n_star if config.rule == "classic" else n_fb
    err = ratio = None
    if selected is not None:
        err = error_sq(inst, grid, selected)
        ratio = err / ctx.min_expected

    # tail probes use their own path so they do not inflate the rule's cost
    tail_b = {}
    if config.tail_pairs:
        probe = SolutionPath(inst, grid)
        for n in sorted({n for n, _ in config.tail_pairs}):
            tail_b[n] = functional_b(probe, config.balancing.sigma, rho, n)

    rho_trace = None
    if config.rho_mode == SPLIT:
        rho_trace = tuple(rho(n) for n in grid.levels)

    return ReplicationRecord(rep_index, seed, n_fb, n_star, ctx.n_opt, err, ctx.min_expected,
                             ratio, evaluations, gap, failure, tail_b, rho_trace)


def _run_range(config: ExperimentConfig, start: int, stop: int) -> list[ReplicationRecord]:
    return [run_replication(config, r) for r in range(start, stop)]


def run_records(config: ExperimentConfig, workers: int | None = None) -> list[ReplicationRecord]:
    workers = workers or config.workers
    if workers <= 1 or config.reps < 2:
        return _run_range(config, 0, config.reps)
    chunk = math.ceil(config.reps / (4 * workers))
    bounds = [(a, min(a + chunk, config.reps)) for a in range(0, config.reps, chunk)]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        parts = pool.map(_run_range, [config] * len(bounds), *zip(*bounds))
        records = [rec for part in parts for rec in part]
    records.sort(key=lambda r: r.rep_index)
    return records


def mean_and_se(values) -> tuple[float, float]:
    values = list(values)
    n = len(values)
    if n == 0:
        return math.nan, math.nan
    mean = math.fsum(values) / n
    if n == 1:
        return mean, 0.0
    var = math.fsum((v - mean) ** 2 for v in values) / (n - 1)
    return mean, math.sqrt(var / n)


@dataclass
class TailRow:
    level: int
    tau: float
    direction: str
    count: int
    reps: int
    frequency: float
    se: float
    bound: float | None
    within: bool | None


def _tail_bound(config: ExperimentConfig, ctx: _Context, level: int, tau: float):
    params = config.params
    split = config.rho_mode == SPLIT
    if level > ctx.n_opt:
        if not split:
            return "overshoot", analysis.tail_bound_overshoot(tau, ctx.K)
        if not math.e / (2 * tau) < 1:
            return "overshoot", None
        return "overshoot", analysis.tilde_tail_overshoot(tau, ctx.K)
    gap = ctx.n_opt - level
    if split:
        return "undershoot", analysis.tilde_tail_undershoot(params, tau, gap)
    return "undershoot", analysis.tail_bound_undershoot(params, tau, gap, ctx.K)


def tail_table(config: ExperimentConfig, records) -> list[TailRow]:
    """Empirical ``P{b(n) > tau}`` above the optimum and ``P{b(n) < tau}`` at or below it."""
    ctx = context(config)
    rows = []
    for level, tau in config.tail_pairs:
        direction, bound = _tail_bound(config, ctx, level, tau)
        values = [r.tail_b[level] for r in records]
        if direction == "overshoot":
            count = sum(v > tau for v in values)
        else:
            count = sum(v < tau for v in values)
        n = len(values)
        freq = count / n
        se = math.sqrt(freq * (1 - freq) / n)
        within = None if bound is None else freq <= bound + 3 * se
        rows.append(TailRow(level, tau, direction, count, n, freq, se, bound, within))
    return rows


@dataclass
class ExperimentSummary:
    reps: int
    mean_ratio: float
    ratio_se: float
    histogram: dict
    n_star_histogram: dict
    tail_frequencies: list
    outlier_count: int
    failures: int
    conditions: dict
    n_opt: int
    n_opt_closed: dict
    min_expected_err_sq: float
    lookahead_K: int
    mean_evaluations: float
    max_evaluations: int
    cost_violations: int
    rho_ratio: dict | None
    config: dict
    runtime: dict

    def to_dict(self) -> dict:
        return asdict(self)


def _histogram(values, n_max) -> dict:
    hist = {str(n): 0 for n in range(n_max + 1)}
    hist["failed"] = 0
    for v in values:
        hist["failed" if v is None else str(v)] += 1
    return hist


def summarize(config: ExperimentConfig, records, runtime: dict | None = None) -> ExperimentSummary:
    ctx = context(config)
    ratios = [r.ratio for r in records if r.ratio is not None]
    mean_ratio, ratio_se = mean_and_se(ratios)
    selected = [r.n_star if config.rule == "classic" else r.n_fb for r in records]
    failures = sum(s is None for s in selected)
    outliers = sum(s is None or abs(s - ctx.n_opt) >= config.outlier_threshold for s in selected)
    fast_runs = [r for r in records if r.n_fb is not None]
    violations = sum(r.evaluations > r.n_fb + ctx.K + 1 for r in fast_runs)
    evals = [r.evaluations for r in records]

    rho_ratio = None
    if config.rho_mode == SPLIT:
        rho_ratio = {}
        for n in ctx.grid.levels:
            m, se = mean_and_se((r.rho_trace[n] / ctx.rho_analytic[n]) ** 2 for r in records)
            rho_ratio[str(n)] = {"mean": m, "se": se}

    closed = analysis.n_opt_closed(config.params, ctx.grid)
    return ExperimentSummary(
        reps=len(records),
        mean_ratio=mean_ratio,
        ratio_se=ratio_se,
        histogram=_histogram([r.n_fb for r in records] if config.rule != "classic" else selected,
                             ctx.grid.n_max),
        n_star_histogram=(_histogram([r.n_star for r in records], ctx.grid.n_max)
                          if config.rule != "fast" else {}),
        tail_frequencies=[asdict(row) for row in tail_table(config, records)],
        outlier_count=outliers,
        failures=failures,
        conditions=analysis.check_conditions(config.params).as_dict(),
        n_opt=ctx.n_opt,
        n_opt_closed={"s_star": closed.s_star, "n_opt_real": closed.n_opt_real,
                      "n_opt": closed.n_opt},
        min_expected_err_sq=ctx.min_expected,
        lookahead_K=ctx.K,
        mean_evaluations=mean_and_se(evals)[0],
        max_evaluations=max(evals, default=0),
        cost_violations=violations,
        rho_ratio=rho_ratio,
        config=config.to_dict(),
        runtime=runtime or {},
    )


def run_experiment(config: ExperimentConfig, workers: int | None = None,
                   return_records: bool = False):
    workers = workers or config.workers
    t0 = time.perf_counter()
    records = run_records(config, workers)
    runtime = {"seconds": time.perf_counter() - t0, "workers": workers}
    summary = summarize(config, records, runtime)
    return (summary, records) if return_records else summary


def records_to_csv(records) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_FIELDS)
    for rec in records:
        writer.writerow(rec.csv_row())
    return buf.getvalue()


def _parse(value: str, kind):
    return None if value == "" else kind(value)


def records_from_csv(text: str) -> list[ReplicationRecord]:
    reader = csv.DictReader(io.StringIO(text))
    if tuple(reader.fieldnames or ()) != CSV_FIELDS:
        raise ValueError(f"unexpected CSV header {reader.fieldnames}")
    out = []
    for row in reader:
        out.append(ReplicationRecord(
            rep_index=int(row["rep_index"]),
            seed=int(row["seed"]),
            n_fb=_parse(row["n_fb"], int),
            n_star=_parse(row["n_star"], int),
            n_opt=int(row["n_opt"]),
            err_sq_selected=_parse(row["err_sq_selected"], float),
            min_expected_err_sq=float(row["min_expected_err_sq"]),
            ratio=_parse(row["ratio"], float),
            evaluations=int(row["evaluations"]),
        ))
    return out


def _json_default(obj):
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    raise TypeError(f"not JSON serialisable: {type(obj).__name__}")


def summary_to_json(summary: ExperimentSummary) -> str:
    return json.dumps(summary.to_dict(), indent=2, sort_keys=True, default=_json_default) + "\n"


def emit_report(result, fmt: str, destination) -> None:
    """Write records as CSV or a summary as JSON to a path or text stream."""
    if fmt == "csv":
        if isinstance(result, ExperimentSummary):
            raise ValueError("CSV output takes replication records, not a summary")
        text = records_to_csv(result)
    elif fmt == "json":
        if isinstance(result, ExperimentSummary):
            text = summary_to_json(result)
        else:
            text = json.dumps([asdict(r) for r in result], indent=2, default=_json_default) + "\n"
    else:
        raise ValueError(f"unknown report format {fmt!r}")
    if hasattr(destination, "write"):
        destination.write(text)
        return
    path = Path(destination)
    try:
        if path.parent and not path.parent.exists():
            os.makedirs(path.parent, exist_ok=True)
        with open(path, "w", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise ReportError(f"cannot write report to {path}: {exc}") from exc


def loglog_slope(x, y) -> float:
    """Least-squares slope of ``log y`` against ``log x``."""
    lx, ly = np.log(np.asarray(x, float)), np.log(np.asarray(y, float))
    return float(np.polyfit(lx, ly, 1)[0])


def sweep(config: ExperimentConfig, deltas, run_mc: bool = True) -> list[dict]:
    """Per-noise-level optimum, minimal expected error and (optionally) empirical C."""
    rows = []
    for delta in deltas:
        cfg = config.with_overrides(delta=float(delta))
        ctx = context(cfg)
        closed = analysis.n_opt_closed(cfg.params, ctx.grid)
        row = {"delta": float(delta), "n_opt": ctx.n_opt, "n_opt_real": closed.n_opt_real,
               "min_expected_err_sq": ctx.min_expected}
        if run_mc:
            summary = run_experiment(cfg)
            row.update(mean_ratio=summary.mean_ratio, ratio_se=summary.ratio_se,
                       outlier_count=summary.outlier_count)
        rows.append(row)
    return rows
