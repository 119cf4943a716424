"""The VRPTW pricing network: source, customers, sink and the arcs between them."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .instance import VrptwInstance, singleton_infeasibility

TIME = 0
LOAD = 1
N_RESOURCES = 2

SOURCE = "source"
CUSTOMER = "customer"
SINK = "sink"


class InfeasibleInstanceError(ValueError):
    pass


@dataclass(frozen=True)
class NodeData:
    id: int
    kind: str
    window_lo: tuple[float, float]
    window_hi: tuple[float, float]
    demand: float = 0.0
    service_time: float = 0.0
    x: float = 0.0
    y: float = 0.0


@dataclass(frozen=True)
class ArcData:
    id: int
    tail: int
    head: int
    cost: float
    consumption: tuple[float, float]
    covered_constraint: int | None = None


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


class Network:
    """Immutable directed pricing graph.

    Node 0 is the source and the last node is the sink. Arc attributes are
    mirrored in read-only numpy arrays (``arc_tail``, ``arc_cost``, ...) and
    out-adjacency is kept in CSR form (``out_ptr``/``out_arcs``) for the
    labeling kernels.
    """

    def __init__(
        self,
        nodes: Sequence[NodeData],
        arcs: Sequence[ArcData],
        *,
        is_reduced: bool = False,
        parent_arc_ids: Sequence[int] | None = None,
    ):
        self.nodes = tuple(nodes)
        self.arcs = tuple(arcs)
        self.is_reduced = is_reduced
        self.parent_arc_ids = None if parent_arc_ids is None else _readonly(
            np.asarray(parent_arc_ids, dtype=np.int64)
        )
        n = len(self.nodes)
        if n < 2 or self.nodes[0].kind != SOURCE or self.nodes[-1].kind != SINK:
            raise ValueError("node 0 must be the source and the last node the sink")
        self.source = 0
        self.sink = n - 1
        self.n_rows = sum(1 for nd in self.nodes if nd.kind == CUSTOMER)

        out_adj: list[list[int]] = [[] for _ in range(n)]
        in_adj: list[list[int]] = [[] for _ in range(n)]
        for k, a in enumerate(self.arcs):
            if a.id != k:
                raise ValueError("arc ids must be dense and match positions")
            if a.head == self.source or a.tail == self.sink or a.tail == a.head:
                raise ValueError(f"arc {a.tail}->{a.head} violates the network structure")
            out_adj[a.tail].append(k)
            in_adj[a.head].append(k)
        self.out_adj = tuple(tuple(x) for x in out_adj)
        self.in_adj = tuple(tuple(x) for x in in_adj)

        m = len(self.arcs)
        self.arc_tail = _readonly(np.fromiter((a.tail for a in self.arcs), np.int64, m))
        self.arc_head = _readonly(np.fromiter((a.head for a in self.arcs), np.int64, m))
        self.arc_cost = _readonly(np.fromiter((a.cost for a in self.arcs), np.float64, m))
        self.arc_time = _readonly(np.fromiter((a.consumption[TIME] for a in self.arcs), np.float64, m))
        self.arc_load = _readonly(np.fromiter((a.consumption[LOAD] for a in self.arcs), np.float64, m))
        self.arc_row = _readonly(
            np.fromiter(
                (-1 if a.covered_constraint is None else a.covered_constraint for a in self.arcs),
                np.int64,
                m,
            )
        )
        self.win_lo = _readonly(np.array([nd.window_lo for nd in self.nodes], dtype=np.float64))
        self.win_hi = _readonly(np.array([nd.window_hi for nd in self.nodes], dtype=np.float64))
        ptr = np.zeros(n + 1, dtype=np.int64)
        ptr[1:] = np.cumsum([len(x) for x in out_adj])
        self.out_ptr = _readonly(ptr)
        self.out_arcs = _readonly(np.fromiter((k for x in out_adj for k in x), np.int64, m))
        self._arc_index = {(a.tail, a.head): a.id for a in self.arcs}

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def n_arcs(self) -> int:
        return len(self.arcs)

    def arc_id(self, tail: int, head: int) -> int | None:
        return self._arc_index.get((tail, head))

    def is_depot_arc(self, arc_id: int) -> bool:
        a = self.arcs[arc_id]
        return a.tail == self.source or a.head == self.sink

    def selectable_mask(self) -> np.ndarray:
        """Boolean mask of customer-to-customer arcs."""
        return (self.arc_tail != self.source) & (self.arc_head != self.sink)

    def full_arc_ids(self) -> np.ndarray:
        """Ids of this network's arcs in the full network it was cut from."""
        if self.parent_arc_ids is None:
            return np.arange(self.n_arcs, dtype=np.int64)
        return self.parent_arc_ids

    def __repr__(self) -> str:
        tag = "reduced " if self.is_reduced else ""
        return f"<{tag}Network nodes={self.n_nodes} arcs={self.n_arcs}>"


def build_network(inst: VrptwInstance) -> Network:
    """Full VRPTW network with statically infeasible arcs pruned."""
    if inst.n_customers < 1:
        raise InfeasibleInstanceError("instance has no customers")
    if inst.vehicle_capacity <= 0:
        raise InfeasibleInstanceError("vehicle capacity must be positive")
    d = inst.depot
    if d.window_lo > d.window_hi:
        raise InfeasibleInstanceError("depot window is empty")
    bad = singleton_infeasibility(inst)
    if bad:
        cid, why = bad[0]
        raise InfeasibleInstanceError(f"customer {cid}: singleton route infeasible ({why})")

    q = inst.vehicle_capacity
    n = inst.n_customers
    nodes = [NodeData(0, SOURCE, (d.window_lo, 0.0), (d.window_hi, q), x=d.x, y=d.y)]
    for k, c in enumerate(inst.customers, start=1):
        nodes.append(
            NodeData(k, CUSTOMER, (c.window_lo, 0.0), (c.window_hi, q), c.demand, c.service_time, c.x, c.y)
        )
    nodes.append(NodeData(n + 1, SINK, (d.window_lo, 0.0), (d.window_hi, q), x=d.x, y=d.y))

    arcs: list[ArcData] = []
    for i in range(n + 1):
        ni = nodes[i]
        for j in range(1, n + 2):
            if i == j or (i == 0 and j == n + 1):
                continue
            nj = nodes[j]
            dist = math.hypot(ni.x - nj.x, ni.y - nj.y)
            t = ni.service_time + dist
            if ni.window_lo[TIME] + t > nj.window_hi[TIME]:
                continue
            if ni.demand + nj.demand > q:
                continue
            if t <= 0.0 and ni.kind == CUSTOMER and nj.kind == CUSTOMER:
                # label-setting by time needs strictly increasing time on customer arcs
                raise InfeasibleInstanceError(f"customers {i} and {j} are co-located with zero service time")
            row = j - 1 if nj.kind == CUSTOMER else None
            arcs.append(ArcData(len(arcs), i, j, dist, (t, nj.demand), row))
    return Network(nodes, arcs)


def reduce_network(full: Network, keep: Sequence[bool] | np.ndarray) -> Network:
    """Subnetwork with the kept arcs plus every depot-incident arc."""
    keep = np.asarray(keep, dtype=bool)
    if keep.shape != (full.n_arcs,):
        raise ValueError(f"keep mask has {keep.shape[0]} entries, network has {full.n_arcs} arcs")
    mask = keep | ~full.selectable_mask()
    parents = full.full_arc_ids()
    arcs = []
    parent_ids = []
    for k in np.flatnonzero(mask):
        a = full.arcs[k]
        arcs.append(ArcData(len(arcs), a.tail, a.head, a.cost, a.consumption, a.covered_constraint))
        parent_ids.append(int(parents[k]))
    return Network(full.nodes, arcs, is_reduced=True, parent_arc_ids=parent_ids)
