"""Column generation drivers: baseline, data collection, ML arc selection and
the reduced-cost / random / cost selection heuristics."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .network import Network, reduce_network
from .pricing import PricingLimits, PricingResult, price_arcs, solve_pricing
from .rmp import Column, LpSolution, RmpState, add_columns, init_rmp, solve_lp

STRATEGIES = ("baseline", "ml_s", "random_s", "cost_s", "redcost_s", "ml_redcost_s")
SELECTION_STRATEGIES = ("ml_s", "random_s", "cost_s", "ml_redcost_s")

FULL = "G"
REDUCED = "Gr"


class CgError(RuntimeError):
    pass


@dataclass
class CgConfig:
    strategy: str = "baseline"
    eta_min: int = 30
    eta_max: int = 100
    disable_reduced_after_first_failure: bool = True
    redcost_levels: tuple[float, ...] = (10, 20, math.inf)
    max_columns_per_iter: int = 200
    rng_seed: int = 0
    neg_eps: float = 1e-6
    max_iterations: int = 100_000

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {self.strategy!r}; expected one of {STRATEGIES}")
        if not 0 <= self.eta_min <= self.eta_max:
            raise ValueError("need 0 <= eta_min <= eta_max")
        levels = tuple(float(v) for v in self.redcost_levels)
        if not levels or any(b <= a for a, b in zip(levels, levels[1:])):
            raise ValueError("redcost_levels must be strictly increasing")
        if levels[-1] != math.inf:
            levels = levels + (math.inf,)
        self.redcost_levels = levels
        if self.max_columns_per_iter < 1:
            raise ValueError("max_columns_per_iter must be positive")

    @property
    def limits(self) -> PricingLimits:
        return PricingLimits(max_columns=self.max_columns_per_iter, neg_eps=self.neg_eps)


@dataclass
class IterationRecord:
    iteration: int
    network: str
    level: float
    columns: int
    labels: int
    pricing_seconds: float
    rmp_seconds: float
    objective: float
    pricing_calls: int = 1


@dataclass
class RunStats:
    iterations: int = 0
    full_network_iterations: int = 0
    pp_time: float = 0.0
    rmp_time: float = 0.0
    total_time: float = 0.0
    setup_time: float = 0.0
    per_iteration: list[IterationRecord] = field(default_factory=list)


@dataclass
class CgRun:
    solution: LpSolution
    stats: RunStats
    state: RmpState


# ---------------------------------------------------------------------------
# Arc masks
# ---------------------------------------------------------------------------


def _group_ranks(net: Network, score: np.ndarray, by_head: bool) -> tuple[np.ndarray, np.ndarray]:
    """Rank of every selectable arc within its tail (or head) group by ``score``."""
    ids = np.flatnonzero(net.selectable_mask())
    if ids.size == 0:
        return ids, ids
    groups = (net.arc_head if by_head else net.arc_tail)[ids]
    order = np.lexsort((ids, score[ids], groups))
    g = groups[order]
    starts = np.r_[0, np.flatnonzero(g[1:] != g[:-1]) + 1]
    first = np.repeat(starts, np.diff(np.r_[starts, g.size]))
    ranks = np.empty(ids.size, dtype=np.int64)
    ranks[order] = np.arange(ids.size) - first
    return ids, ranks


def quota_mask(net: Network, score: np.ndarray, quota: float) -> np.ndarray:
    """Keep each node's ``quota`` best-scored outgoing and incoming selectable arcs."""
    keep = np.zeros(net.n_arcs, dtype=bool)
    if quota == math.inf:
        keep[net.selectable_mask()] = True
        return keep
    for by_head in (False, True):
        ids, ranks = _group_ranks(net, score, by_head)
        keep[ids[ranks < quota]] = True
    return keep


def expand_selectable(net: Network, sub_mask: Sequence[bool]) -> np.ndarray:
    """Lift a mask over the selectable arcs to a mask over all arcs."""
    ids = np.flatnonzero(net.selectable_mask())
    sub_mask = np.asarray(sub_mask, dtype=bool)
    if sub_mask.shape != ids.shape:
        raise ValueError(f"mask covers {sub_mask.size} arcs, network has {ids.size} selectable arcs")
    keep = np.zeros(net.n_arcs, dtype=bool)
    keep[ids[sub_mask]] = True
    return keep


def select_random(keep_count: int, arc_count: int, seed) -> np.ndarray:
    """Uniformly random mask with exactly ``keep_count`` true entries."""
    if not 0 <= keep_count <= arc_count:
        raise ValueError("keep_count must lie in [0, arc_count]")
    rng = np.random.default_rng(seed)
    mask = np.zeros(arc_count, dtype=bool)
    mask[rng.permutation(arc_count)[:keep_count]] = True
    return mask


def select_cost(net: Network, target_count: int) -> np.ndarray:
    """Cheapest-arcs selection with the smallest uniform per-node quota reaching ``target_count``."""
    n_sel = int(net.selectable_mask().sum())
    if not 0 <= target_count <= n_sel:
        raise ValueError("target_count must lie in [0, number of selectable arcs]")
    _, out_rank = _group_ranks(net, net.arc_cost, by_head=False)
    ids, in_rank = _group_ranks(net, net.arc_cost, by_head=True)
    max_rank = int(max(out_rank.max(initial=0), in_rank.max(initial=0))) + 1
    for q in range(max_rank + 1):
        keep = quota_mask(net, net.arc_cost, q)
        if keep.sum() >= target_count:
            return keep
    return quota_mask(net, net.arc_cost, math.inf)


# ---------------------------------------------------------------------------
# Driver
# ---------------------------------------------------------------------------


def _price(
    active: Network, duals: np.ndarray, cfg: CgConfig, redcost: bool
) -> tuple[PricingResult, float, int, int]:
    """One CG pricing step on ``active``; returns (result, level, labels, calls)."""
    levels = cfg.redcost_levels if redcost else (math.inf,)
    labels = 0
    t = 0.0
    for calls, level in enumerate(levels, start=1):
        priced = price_arcs(active, duals)
        net = active
        if level != math.inf:
            net = reduce_network(active, quota_mask(active, priced, level))
            priced = price_arcs(net, duals)
        res = solve_pricing(net, priced, cfg.limits)
        labels += res.labels_created
        t += res.time_spent
        if res.columns:
            break
    res.labels_created = labels
    res.time_spent = t
    return res, level, labels, calls


def _run(
    net: Network,
    cfg: CgConfig,
    reduced: Network | None = None,
    redcost: bool = False,
    on_columns: Callable[[list[Column]], None] | None = None,
) -> CgRun:
    t_start = time.perf_counter()
    stats = RunStats()
    state = init_rmp(net)
    t = time.perf_counter()
    sol = solve_lp(state)
    rmp_seconds = time.perf_counter() - t
    stats.rmp_time += rmp_seconds

    use_reduced = reduced is not None
    reduced_disabled = False
    for it in range(cfg.max_iterations):
        on_reduced = use_reduced
        active = reduced if on_reduced else net
        t = time.perf_counter()
        res, level, labels, calls = _price(active, sol.duals, cfg, redcost)
        pp = time.perf_counter() - t
        stats.pp_time += pp
        n_cols = len(res.columns)
        stats.per_iteration.append(
            IterationRecord(
                it,
                REDUCED if on_reduced else FULL,
                level,
                n_cols,
                labels,
                pp,
                rmp_seconds,
                sol.objective,
                calls,
            )
        )
        stats.iterations += 1
        if not on_reduced and level == math.inf:
            stats.full_network_iterations += 1
        rmp_seconds = 0.0

        if on_reduced and n_cols < cfg.eta_min:
            use_reduced = False
            if cfg.disable_reduced_after_first_failure:
                reduced_disabled = True
        elif not on_reduced and n_cols >= cfg.eta_max and reduced is not None and not reduced_disabled:
            use_reduced = True
        elif not on_reduced and n_cols == 0:
            break

        if n_cols:
            if on_columns is not None:
                on_columns(res.columns)
            if add_columns(state, res.columns) == 0:
                raise CgError("pricing returned only columns already in the master")
            t = time.perf_counter()
            sol = solve_lp(state)
            rmp_seconds = time.perf_counter() - t
            stats.rmp_time += rmp_seconds
    else:
        raise CgError(f"no convergence within {cfg.max_iterations} iterations")

    stats.total_time = time.perf_counter() - t_start
    return CgRun(sol, stats, state)


def run_baseline(net: Network, cfg: CgConfig = CgConfig()) -> tuple[LpSolution, RunStats]:
    run = _run(net, cfg)
    return run.solution, run.stats


def run_redcost(net: Network, cfg: CgConfig) -> tuple[LpSolution, RunStats]:
    run = _run(net, cfg, redcost=True)
    return run.solution, run.stats


def run_ml(net: Network, cfg: CgConfig, keep: Sequence[bool]) -> tuple[LpSolution, RunStats]:
    """Alternate between the reduced network and the full one on column counts."""
    reduced = reduce_network(net, keep)
    run = _run(net, cfg, reduced=reduced, redcost=cfg.strategy == "ml_redcost_s")
    return run.solution, run.stats


def collect_labels(net: Network, cfg: CgConfig = CgConfig()) -> tuple[CgRun, np.ndarray]:
    """CG run recording which full-network arcs appear in generated columns.

    The trajectory follows the baseline, or RedCost-S when
    ``cfg.strategy == "redcost_s"`` (that run then acts as the expert).
    """
    y = np.zeros(net.n_arcs, dtype=np.int8)

    def mark(cols: list[Column]) -> None:
        for col in cols:
            y[list(col.arcs)] = 1

    run = _run(net, cfg, redcost=cfg.strategy == "redcost_s", on_columns=mark)
    return run, y


def run_collect(net: Network, cfg: CgConfig = CgConfig()) -> tuple[LpSolution, np.ndarray]:
    run, y = collect_labels(net, cfg)
    return run.solution, y
