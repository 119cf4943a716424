"""Restricted master problem: set partitioning over generated routes."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import simplex
from .network import Network

LpError = simplex.LpError


@dataclass
class Column:
    """A route ``(s, customers..., t)`` and its master coefficients.

    ``coeffs`` maps master rows to visit counts (2-cycle-free routes may
    visit a customer more than once). ``arcs`` holds full-network arc ids.
    """

    route: tuple[int, ...]
    cost: float
    coeffs: dict[int, int]
    arcs: tuple[int, ...] = ()
    rcost_at_birth: float = 0.0
    id: int = -1


@dataclass
class LpSolution:
    objective: float
    primal: dict[int, float]
    duals: np.ndarray
    iterations: int


@dataclass
class RmpState:
    net: Network
    n_rows: int
    columns: list[Column] = field(default_factory=list)
    basis: list[int] | None = None
    _routes: dict[tuple[int, ...], int] = field(default_factory=dict)
    _A: np.ndarray = field(default_factory=lambda: np.zeros((0, 0)))
    _c: np.ndarray = field(default_factory=lambda: np.zeros(0))

    @property
    def n_columns(self) -> int:
        return len(self.columns)

    def matrix(self) -> tuple[np.ndarray, np.ndarray]:
        k = len(self.columns)
        return self._A[:, :k], self._c[:k]


def column_from_arcs(net: Network, arc_ids: Sequence[int], rcost: float = 0.0) -> Column:
    """Build a column from arc ids of ``net`` (which may be a reduced network)."""
    route = [net.arcs[arc_ids[0]].tail]
    cost = 0.0
    coeffs: dict[int, int] = {}
    for k in arc_ids:
        a = net.arcs[k]
        route.append(a.head)
        cost += a.cost
        if a.covered_constraint is not None:
            coeffs[a.covered_constraint] = coeffs.get(a.covered_constraint, 0) + 1
    full = net.full_arc_ids()
    return Column(tuple(route), cost, coeffs, tuple(int(full[k]) for k in arc_ids), rcost)


def column_from_route(net: Network, route: Sequence[int]) -> Column:
    arcs = []
    for u, v in zip(route[:-1], route[1:]):
        k = net.arc_id(u, v)
        if k is None:
            raise ValueError(f"route uses missing arc {u}->{v}")
        arcs.append(k)
    return column_from_arcs(net, arcs)


def init_rmp(net: Network) -> RmpState:
    """Seed the pool with one singleton route per customer."""
    state = RmpState(net, net.n_rows)
    state._A = np.zeros((net.n_rows, max(64, 2 * net.n_rows)))
    state._c = np.zeros(state._A.shape[1])
    seeds = []
    for i in range(1, net.n_nodes - 1):
        if net.arc_id(net.source, i) is None or net.arc_id(i, net.sink) is None:
            raise ValueError(f"singleton route for customer {i} is infeasible")
        seeds.append(column_from_route(net, (net.source, i, net.sink)))
    add_columns(state, seeds)
    state.basis = list(range(net.n_rows))
    return state


def add_columns(state: RmpState, cols: Iterable[Column]) -> int:
    """Append columns whose route is not already pooled; return how many were added."""
    added = 0
    for col in cols:
        if col.route in state._routes:
            continue
        k = len(state.columns)
        if k == state._A.shape[1]:
            grow = state._A.shape[1]
            state._A = np.hstack([state._A, np.zeros((state.n_rows, grow))])
            state._c = np.concatenate([state._c, np.zeros(grow)])
        for row, v in col.coeffs.items():
            if not 0 <= row < state.n_rows:
                raise ValueError(f"column references missing row {row}")
            state._A[row, k] = v
        state._c[k] = col.cost
        col.id = k
        state.columns.append(col)
        state._routes[col.route] = k
        added += 1
    return added


def solve_lp(state: RmpState, warm: bool = True) -> LpSolution:
    """Optimize the RMP; warm-starts from the previous optimal basis when available."""
    A, c = state.matrix()
    b = np.ones(state.n_rows)
    start = state.basis if (warm and state.basis is not None) else list(range(state.n_rows))
    res = simplex.solve(A, b, c, start)
    state.basis = res.basis
    primal = {j: float(res.x[j]) for j in np.flatnonzero(res.x > 0.0)}
    return LpSolution(res.objective, primal, res.duals, res.iterations)


def reduced_costs(state: RmpState, duals: np.ndarray) -> np.ndarray:
    A, c = state.matrix()
    return c - duals @ A


def export_lp(state: RmpState, path: str | Path | None = None) -> str:
    """The current RMP in CPLEX LP text format."""
    A, c = state.matrix()
    lines = ["\\ restricted master problem", "Minimize", " obj:"]
    lines += [f"    {'+' if v >= 0 else '-'} {abs(float(v))!r} x{j}" for j, v in enumerate(c)]
    lines.append("Subject To")
    for i in range(state.n_rows):
        terms = [f"{float(A[i, j])!r} x{j}" for j in np.flatnonzero(A[i])]
        lines.append(f" cover{i}: " + " + ".join(terms) + " = 1")
    lines.append("End")
    text = "\n".join(lines) + "\n"
    if path is not None:
        Path(path).write_text(text)
    return text
