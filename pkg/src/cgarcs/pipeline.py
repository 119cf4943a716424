"""End-to-end pipeline: collect datasets, train models, solve and benchmark."""

from __future__ import annotations

import csv
import logging
import math
import time
import zlib
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from . import colgen
from .colgen import CgConfig, RunStats
from .features import Dataset, build_dataset
from .instance import VrptwInstance, read_instance, tighten_windows
from .learn import (
    ForestHyper,
    LogisticHyper,
    Metrics,
    ModelError,
    TrainedModel,
    evaluate,
    predict_network,
    train_forest,
    train_logistic,
)
from .network import Network, build_network

log = logging.getLogger(__name__)

REPORT_VERSION = 1
TIMING_FIELDS = ("pp_seconds", "rmp_seconds", "total_seconds", "gain_vs_baseline")
REPORT_FIELDS = (
    "instance",
    "n_customers",
    "strategy",
    "iterations",
    "full_network_iterations",
    "pp_seconds",
    "rmp_seconds",
    "total_seconds",
    "objective",
    "abs_gap_vs_baseline",
    "gain_vs_baseline",
    "status",
)
TRACE_FIELDS = (
    "iteration",
    "network",
    "level",
    "columns",
    "labels",
    "pricing_calls",
    "pricing_seconds",
    "rmp_seconds",
    "setup_seconds",
    "objective",
)
TRACE_TIMING = ("pricing_seconds", "rmp_seconds", "setup_seconds")


def derive_seed(root: int, *labels) -> int:
    """Child seed for ``labels`` (e.g. instance name, purpose) under ``root``."""
    words = [int(root)] + [zlib.crc32(str(lab).encode()) for lab in labels]
    return int(np.random.SeedSequence(words).generate_state(1)[0])


def load_instance(path: str | Path, tighten: float | None = None) -> VrptwInstance:
    inst = read_instance(path)
    if tighten is not None and tighten != 1.0:
        inst = tighten_windows(inst, tighten)
    return inst


def instance_id(path: str | Path) -> str:
    return Path(path).stem


# ---------------------------------------------------------------------------
# collect / train
# ---------------------------------------------------------------------------


@dataclass
class CollectSummary:
    rows: dict[str, int]
    positive_fraction: dict[str, float]
    skipped: dict[str, str]


def collect(
    paths: Sequence[str | Path], cfg: CgConfig, tighten: float | None = None
) -> tuple[Dataset, CollectSummary]:
    runs = []
    summary = CollectSummary({}, {}, {})
    for p in paths:
        name = instance_id(p)
        try:
            net = build_network(load_instance(p, tighten))
        except ValueError as exc:
            log.warning("skipping %s: %s", p, exc)
            summary.skipped[name] = str(exc)
            continue
        _, y = colgen.run_collect(net, cfg)
        sel = net.selectable_mask()
        summary.rows[name] = int(sel.sum())
        summary.positive_fraction[name] = float(y[sel].mean()) if sel.any() else 0.0
        runs.append((name, net, y))
    return build_dataset(runs), summary


def split_by_instance(data: Dataset, test_fraction: float, seed: int) -> tuple[Dataset, Dataset]:
    """Seeded train/test split keeping every instance's samples on one side."""
    names = data.instances()
    rng = np.random.default_rng(derive_seed(seed, "split"))
    perm = [names[i] for i in rng.permutation(len(names))]
    n_test = int(round(test_fraction * len(names))) if len(names) > 1 else 0
    if test_fraction > 0 and n_test == 0 and len(names) > 1:
        n_test = 1
    test = set(perm[:n_test])
    is_test = np.array([i in test for i in data.instance_ids], dtype=bool)
    return data.subset(np.flatnonzero(~is_test)), data.subset(np.flatnonzero(is_test))


def train(
    data: Dataset,
    kind: str,
    *,
    seed: int = 0,
    test_fraction: float = 0.2,
    forest: ForestHyper | None = None,
    logistic: LogisticHyper | None = None,
) -> tuple[TrainedModel, Metrics | None, Dataset, Dataset]:
    train_set, test_set = split_by_instance(data, test_fraction, seed)
    if np.unique(train_set.y).size < 2:
        raise ModelError("training side holds a single class; collect more instances")
    if kind == "forest":
        hyper = forest or ForestHyper()
        model = train_forest(train_set, replace(hyper, seed=derive_seed(seed, "forest")))
    elif kind == "logistic":
        model = train_logistic(train_set, logistic or LogisticHyper())
    else:
        raise ValueError(f"unknown model kind {kind!r}")
    metrics = evaluate(model, test_set) if len(test_set) else None
    return model, metrics, train_set, test_set


# ---------------------------------------------------------------------------
# solve / bench
# ---------------------------------------------------------------------------


@dataclass
class ReportRow:
    instance: str
    n_customers: int
    strategy: str
    iterations: int = 0
    full_network_iterations: int = 0
    pp_seconds: float = 0.0
    rmp_seconds: float = 0.0
    total_seconds: float = 0.0
    objective: float = math.nan
    abs_gap_vs_baseline: float | None = None
    gain_vs_baseline: float | None = None
    status: str = "ok"


@dataclass
class SolveOutcome:
    row: ReportRow
    stats: RunStats | None
    keep: np.ndarray | None = None


def selection_mask(
    net: Network, strategy: str, model: TrainedModel | None, seed: int, keep_fraction: float = 0.25
) -> np.ndarray:
    """Arc keep mask for the arc-selection strategies."""
    n_sel = int(net.selectable_mask().sum())
    model_keep = None
    if model is not None:
        _, model_keep = predict_network(model, net)
    if strategy in ("ml_s", "ml_redcost_s"):
        if model_keep is None:
            raise ModelError(f"strategy {strategy} needs a model")
        return model_keep
    count = int(model_keep[net.selectable_mask()].sum()) if model_keep is not None else int(
        round(keep_fraction * n_sel)
    )
    if strategy == "random_s":
        return colgen.expand_selectable(net, colgen.select_random(count, n_sel, seed))
    if strategy == "cost_s":
        return colgen.select_cost(net, count)
    raise ValueError(f"strategy {strategy} does not select arcs")


def solve(
    net: Network,
    name: str,
    strategy: str,
    cfg: CgConfig,
    model: TrainedModel | None = None,
    keep_fraction: float = 0.25,
) -> SolveOutcome:
    cfg = replace(cfg, strategy=strategy)
    row = ReportRow(name, net.n_rows, strategy)
    keep = None
    t0 = time.perf_counter()
    if strategy == "baseline":
        sol, stats = colgen.run_baseline(net, cfg)
    elif strategy == "redcost_s":
        sol, stats = colgen.run_redcost(net, cfg)
    else:
        keep = selection_mask(net, strategy, model, derive_seed(cfg.rng_seed, strategy, name), keep_fraction)
        setup = time.perf_counter() - t0
        sol, stats = colgen.run_ml(net, cfg, keep)
        stats.setup_time = setup
        stats.total_time += setup
    row.iterations = stats.iterations
    row.full_network_iterations = stats.full_network_iterations
    row.pp_seconds = stats.pp_time
    row.rmp_seconds = stats.rmp_time
    row.total_seconds = stats.total_time
    row.objective = sol.objective
    return SolveOutcome(row, stats, keep)


def fill_baseline_columns(rows: list[ReportRow]) -> None:
    """Gap and time gain of every row against the baseline row of its instance."""
    base = {r.instance: r for r in rows if r.strategy == "baseline" and r.status == "ok"}
    for r in rows:
        b = base.get(r.instance)
        if b is None or r.status != "ok":
            continue
        r.abs_gap_vs_baseline = abs(r.objective - b.objective)
        if r.strategy != "baseline" and b.total_seconds > 0:
            r.gain_vs_baseline = 100.0 * (1.0 - r.total_seconds / b.total_seconds)


def gain(total: float, total_baseline: float) -> float:
    return 100.0 * (1.0 - total / total_baseline)


def average_rows(rows: list[ReportRow]) -> list[ReportRow]:
    """One average row per (instance size, strategy), in order of appearance."""
    groups: dict[tuple[int, str], list[ReportRow]] = {}
    for r in rows:
        if r.status == "ok":
            groups.setdefault((r.n_customers, r.strategy), []).append(r)
    out = []
    for (n, strategy), rs in groups.items():
        avg = ReportRow(f"Average(n={n})", n, strategy, status="average")
        for f in ("iterations", "full_network_iterations", "pp_seconds", "rmp_seconds", "total_seconds", "objective"):
            setattr(avg, f, float(np.mean([getattr(r, f) for r in rs])))
        gaps = [r.abs_gap_vs_baseline for r in rs if r.abs_gap_vs_baseline is not None]
        avg.abs_gap_vs_baseline = max(gaps) if gaps else None
        # the group gain is the mean of the per-instance gains, not the gain of the mean times
        gains = [r.gain_vs_baseline for r in rs if r.gain_vs_baseline is not None]
        if strategy != "baseline" and gains:
            avg.gain_vs_baseline = float(np.mean(gains))
        out.append(avg)
    return out


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        if math.isnan(v):
            return ""
        return format(v, ".17g")
    return str(v)


def write_report(rows: Sequence[ReportRow], path: str | Path, timing: bool = True) -> None:
    fields = [f for f in REPORT_FIELDS if timing or f not in TIMING_FIELDS]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(fields)
        for r in rows:
            w.writerow([_cell(getattr(r, f)) for f in fields])


def read_report(path: str | Path) -> list[dict[str, str]]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def write_trace(stats: RunStats, path: str | Path, timing: bool = True) -> None:
    fields = [f for f in TRACE_FIELDS if timing or f not in TRACE_TIMING]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(fields)
        for rec in stats.per_iteration:
            vals = {
                "iteration": rec.iteration,
                "network": rec.network,
                "level": "inf" if rec.level == math.inf else int(rec.level),
                "columns": rec.columns,
                "labels": rec.labels,
                "pricing_calls": rec.pricing_calls,
                "pricing_seconds": rec.pricing_seconds,
                "rmp_seconds": rec.rmp_seconds,
                "setup_seconds": stats.setup_time if rec.iteration == 0 else 0.0,
                "objective": rec.objective,
            }
            w.writerow([_cell(vals[f]) for f in fields])


def bench(
    paths: Sequence[str | Path],
    strategies: Sequence[str],
    cfg: CgConfig,
    model: TrainedModel | None = None,
    tighten: float | None = None,
    trace_dir: str | Path | None = None,
    timing: bool = True,
    threads: int = 1,
    keep_fraction: float = 0.25,
) -> list[ReportRow]:
    """Every (instance, strategy) cell, baseline included, with per-size averages appended."""
    strategies = ["baseline"] + [s for s in strategies if s != "baseline"]
    cells = [(p, s) for p in paths for s in strategies]

    def run_cell(cell) -> tuple[ReportRow, RunStats | None]:
        p, s = cell
        name = instance_id(p)
        try:
            net = build_network(load_instance(p, tighten))
            out = solve(net, name, s, cfg, model, keep_fraction)
            return out.row, out.stats
        except Exception as exc:  # recorded per row; the bench carries on
            log.error("%s / %s failed: %s", name, s, exc)
            return ReportRow(name, 0, s, status=f"error: {exc}"), None

    if threads > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(threads) as ex:
            results = list(ex.map(run_cell, cells))
    else:
        results = [run_cell(c) for c in cells]

    rows = [r for r, _ in results]
    if trace_dir is not None:
        Path(trace_dir).mkdir(parents=True, exist_ok=True)
        for (row, stats) in results:
            if stats is not None:
                write_trace(stats, Path(trace_dir) / f"{row.instance}__{row.strategy}.csv", timing)
    fill_baseline_columns(rows)
    return rows + average_rows(rows)
