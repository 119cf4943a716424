"""Pricing: SPPRC with 2-cycle elimination solved by label setting.

The inner loop lives in a compiled extension (``cgarcs._labeling``); when it
is not built, or ``CGARCS_PURE_PYTHON=1`` is set, the identical pure-Python
kernel in ``cgarcs._labeling_py`` is used instead.
"""

from __future__ import annotations

import os
import time
from dataclasses import dataclass, field

import numpy as np

from .network import LOAD, TIME, ArcData, Network
from .rmp import Column, column_from_arcs

NEG_EPS = 1e-6

if os.environ.get("CGARCS_PURE_PYTHON") == "1":
    from ._labeling_py import label_setting as _kernel

    BACKEND = "python"
else:
    try:
        from ._labeling import label_setting as _kernel

        BACKEND = "cython"
    except ImportError:  # extension not built
        from ._labeling_py import label_setting as _kernel

        BACKEND = "python"


@dataclass
class PricingLimits:
    max_columns: int = 200
    neg_eps: float = NEG_EPS
    dominance: bool = True


@dataclass
class PricingResult:
    columns: list[Column]
    labels_created: int = 0
    labels_dominated: int = 0
    time_spent: float = 0.0
    n_negative: int = 0


@dataclass
class Label:
    node: int
    rcost: float
    res: tuple[float, float]
    pred_label: "Label | None" = field(default=None, repr=False)
    pred_node: int = -1


def price_arcs(net: Network, duals: np.ndarray) -> np.ndarray:
    """Modified arc costs ``c_ij - pi[row(j)]``, indexed by arc id."""
    duals = np.asarray(duals, dtype=np.float64)
    if duals.shape != (net.n_rows,):
        raise ValueError(f"expected {net.n_rows} duals, got {duals.shape}")
    mod = net.arc_cost.copy()
    covered = net.arc_row >= 0
    mod[covered] -= duals[net.arc_row[covered]]
    return mod


def source_label(net: Network) -> Label:
    return Label(net.source, 0.0, (net.win_lo[net.source, TIME], net.win_lo[net.source, LOAD]))


def extend(net: Network, label: Label, arc: ArcData, modified_cost: float) -> Label | None:
    """Extend ``label`` along ``arc``; ``None`` when a resource window is violated."""
    if label.node != arc.tail:
        raise ValueError(f"label at node {label.node} cannot extend along arc from {arc.tail}")
    j = arc.head
    res = []
    for r in (TIME, LOAD):
        v = label.res[r] + arc.consumption[r]
        lo = net.win_lo[j, r]
        if v < lo:
            v = lo
        if v > net.win_hi[j, r]:
            return None
        res.append(float(v))
    return Label(j, label.rcost + modified_cost, (res[0], res[1]), label, arc.tail)


def dominates(a: Label, b: Label) -> bool:
    return (
        a.node == b.node
        and a.rcost <= b.rcost
        and a.res[TIME] <= b.res[TIME]
        and a.res[LOAD] <= b.res[LOAD]
    )


def solve_pricing(net: Network, priced: np.ndarray, limits: PricingLimits = PricingLimits()) -> PricingResult:
    """Negative reduced-cost routes of ``net`` under modified costs ``priced``.

    At most ``limits.max_columns`` columns are returned, most negative first
    (ties broken on the node sequence).
    """
    if limits.max_columns < 1:
        raise ValueError("max_columns must be at least 1")
    priced = np.ascontiguousarray(priced, dtype=np.float64)
    if priced.shape != (net.n_arcs,):
        raise ValueError("priced costs are not aligned with the network arcs")
    t0 = time.perf_counter()
    paths, created, dominated = _kernel(
        net.out_ptr,
        net.out_arcs,
        net.arc_head,
        priced,
        net.arc_time,
        net.arc_load,
        np.ascontiguousarray(net.win_lo[:, TIME]),
        np.ascontiguousarray(net.win_hi[:, TIME]),
        np.ascontiguousarray(net.win_lo[:, LOAD]),
        np.ascontiguousarray(net.win_hi[:, LOAD]),
        net.source,
        net.sink,
        limits.neg_eps,
        limits.dominance,
    )
    cols = [column_from_arcs(net, arcs, rc) for rc, arcs in paths]
    cols.sort(key=lambda col: (col.rcost_at_birth, col.route))
    n_neg = len(cols)
    del cols[limits.max_columns :]
    return PricingResult(cols, created, dominated, time.perf_counter() - t0, n_neg)
