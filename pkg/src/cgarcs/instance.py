"""VRPTW instances: Solomon-format I/O, time-window tightening, seeded generators."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np


class InstanceFormatError(ValueError):
    """Raised when instance text does not follow the Solomon layout."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


@dataclass(frozen=True)
class Customer:
    id: int
    x: float
    y: float
    demand: float
    window_lo: float
    window_hi: float
    service_time: float


@dataclass(frozen=True)
class Depot:
    x: float
    y: float
    window_lo: float
    window_hi: float


@dataclass(frozen=True)
class VrptwInstance:
    name: str
    vehicle_capacity: float
    depot: Depot
    customers: tuple[Customer, ...]
    vehicle_number: int = 25

    @property
    def n_customers(self) -> int:
        return len(self.customers)


# ---------------------------------------------------------------------------
# Solomon / Gehring-Homberger text layout
# ---------------------------------------------------------------------------


def _numbers(line: str, lineno: int) -> list[float]:
    try:
        return [float(tok) for tok in line.split()]
    except ValueError:
        raise InstanceFormatError(f"non-numeric field in {line.strip()!r}", lineno) from None


def parse_instance(text: str) -> VrptwInstance:
    """Parse a Solomon / Gehring-Homberger VRPTW file.

    The first non-blank line is the instance name. The ``VEHICLE`` section
    gives ``NUMBER CAPACITY``; the ``CUSTOMER`` table lists rows of
    ``CUST NO. XCOORD. YCOORD. DEMAND READY TIME DUE DATE SERVICE TIME`` with
    row 0 describing the depot.
    """
    lines = text.splitlines()
    content = [(i + 1, ln) for i, ln in enumerate(lines) if ln.strip()]
    if not content:
        raise InstanceFormatError("empty instance text")

    name = content[0][1].strip()
    pos = 1

    def expect_keyword(word: str) -> None:
        nonlocal pos
        if pos >= len(content):
            raise InstanceFormatError(f"missing {word} section", len(lines))
        lineno, ln = content[pos]
        if ln.strip().upper() != word:
            raise InstanceFormatError(f"expected {word!r}, found {ln.strip()!r}", lineno)
        pos += 1

    def skip_header() -> None:
        nonlocal pos
        if pos >= len(content):
            raise InstanceFormatError("truncated header", len(lines))
        lineno, ln = content[pos]
        if not any(ch.isalpha() for ch in ln):
            raise InstanceFormatError(f"expected column header, found {ln.strip()!r}", lineno)
        pos += 1

    expect_keyword("VEHICLE")
    skip_header()
    if pos >= len(content):
        raise InstanceFormatError("missing vehicle data", len(lines))
    lineno, ln = content[pos]
    vals = _numbers(ln, lineno)
    if len(vals) != 2:
        raise InstanceFormatError("vehicle line must hold NUMBER and CAPACITY", lineno)
    number, capacity = vals
    if capacity <= 0:
        raise InstanceFormatError("vehicle capacity must be positive", lineno)
    pos += 1

    expect_keyword("CUSTOMER")
    skip_header()
    rows: list[tuple[int, list[float]]] = []
    for lineno, ln in content[pos:]:
        vals = _numbers(ln, lineno)
        if len(vals) != 7:
            raise InstanceFormatError(f"customer row needs 7 fields, got {len(vals)}", lineno)
        rows.append((lineno, vals))
    if not rows:
        raise InstanceFormatError("missing depot row", len(lines))
    lineno, d = rows[0]
    if int(d[0]) != 0:
        raise InstanceFormatError("first customer row must be the depot (number 0)", lineno)
    if d[4] > d[5]:
        raise InstanceFormatError("depot window is empty", lineno)
    depot = Depot(x=d[1], y=d[2], window_lo=d[4], window_hi=d[5])

    customers = []
    for lineno, v in rows[1:]:
        if v[4] > v[5]:
            raise InstanceFormatError(f"customer {int(v[0])} has an empty window", lineno)
        if v[3] < 0 or v[6] < 0:
            raise InstanceFormatError(f"customer {int(v[0])} has negative demand or service", lineno)
        customers.append(Customer(int(v[0]), v[1], v[2], v[3], v[4], v[5], v[6]))
    return VrptwInstance(name, capacity, depot, tuple(customers), int(number))


def read_instance(path: str | Path) -> VrptwInstance:
    return parse_instance(Path(path).read_text())


def _fmt(v: float) -> str:
    if float(v).is_integer() and abs(v) < 1e15:
        return str(int(v))
    return repr(float(v))


def format_instance(inst: VrptwInstance) -> str:
    out = [
        inst.name,
        "",
        "VEHICLE",
        "NUMBER     CAPACITY",
        f"  {inst.vehicle_number:<10d} {_fmt(inst.vehicle_capacity)}",
        "",
        "CUSTOMER",
        "CUST NO.  XCOORD.   YCOORD.    DEMAND   READY TIME  DUE DATE   SERVICE   TIME",
        "",
    ]
    d = inst.depot
    out.append(
        "  ".join(["0", _fmt(d.x), _fmt(d.y), "0", _fmt(d.window_lo), _fmt(d.window_hi), "0"])
    )
    for c in inst.customers:
        out.append(
            "  ".join(
                [
                    str(c.id),
                    _fmt(c.x),
                    _fmt(c.y),
                    _fmt(c.demand),
                    _fmt(c.window_lo),
                    _fmt(c.window_hi),
                    _fmt(c.service_time),
                ]
            )
        )
    return "\n".join(out) + "\n"


def write_instance(inst: VrptwInstance, path: str | Path) -> None:
    Path(path).write_text(format_instance(inst))


# ---------------------------------------------------------------------------
# Transforms
# ---------------------------------------------------------------------------


def tighten_windows(inst: VrptwInstance, factor: float) -> VrptwInstance:
    """Shrink every customer window around its center by ``factor``."""
    if not 0.0 < factor <= 1.0:
        raise ValueError(f"tightening factor must lie in (0, 1], got {factor}")
    if factor == 1.0:
        return inst
    customers = []
    for c in inst.customers:
        center = 0.5 * (c.window_lo + c.window_hi)
        half = 0.5 * factor * (c.window_hi - c.window_lo)
        customers.append(replace(c, window_lo=center - half, window_hi=center + half))
    return replace(inst, customers=tuple(customers))


def singleton_infeasibility(inst: VrptwInstance) -> list[tuple[int, str]]:
    """Customers whose route depot -> i -> depot is infeasible, with the reason."""
    d = inst.depot
    bad = []
    for c in inst.customers:
        dist = math.hypot(c.x - d.x, c.y - d.y)
        start = max(c.window_lo, d.window_lo + dist)
        if c.demand > inst.vehicle_capacity:
            bad.append((c.id, f"demand {c.demand} exceeds capacity {inst.vehicle_capacity}"))
        elif start > c.window_hi:
            bad.append((c.id, f"earliest arrival {start:.6g} after window end {c.window_hi:.6g}"))
        elif start + c.service_time + dist > d.window_hi:
            bad.append((c.id, "cannot return to the depot before it closes"))
    return bad


# ---------------------------------------------------------------------------
# Generators
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RandomParams:
    side: float = 100.0
    capacity: float = 30.0
    service_time: float = 5.0
    min_width: float = 15.0
    max_width: float = 60.0


def generate_random(n_customers: int, seed: int, params: RandomParams = RandomParams()) -> VrptwInstance:
    """Small seeded instance with every singleton route feasible."""
    if n_customers < 1:
        raise ValueError("need at least one customer")
    rng = np.random.default_rng(seed)
    half = params.side / 2.0
    depot_xy = (half, half)
    horizon = 2.0 * math.hypot(half, half) + params.service_time + 4.0 * params.max_width
    customers = []
    max_dem = max(1, int(params.capacity // 3))
    for i in range(1, n_customers + 1):
        x, y = rng.uniform(0.0, params.side, size=2)
        dist = math.hypot(x - depot_xy[0], y - depot_xy[1])
        demand = float(rng.integers(1, max_dem + 1))
        center = rng.uniform(dist, horizon - params.service_time - dist)
        width = rng.uniform(params.min_width, params.max_width)
        lo = max(0.0, center - width / 2.0)
        customers.append(
            Customer(i, float(x), float(y), demand, float(lo), float(center + width / 2.0), params.service_time)
        )
    depot = Depot(depot_xy[0], depot_xy[1], 0.0, float(horizon))
    return VrptwInstance(f"rand{n_customers}_s{seed}", params.capacity, depot, tuple(customers))


SOLOMON_FAMILIES = ("R2", "C2", "RC2")


def generate_solomon_like(
    n_customers: int, family: str, seed: int, width_range: tuple[float, float] = (0.06, 0.24)
) -> VrptwInstance:
    """Instance mimicking the layout of the Solomon R2 / C2 / RC2 classes.

    Coordinates live on the 100x100 grid with the depot near the center,
    demands are integral in [1, 40], capacity is 1000 (700 for C2) and the
    horizon is 1000 (3390 for C2, 960 for RC2). Windows are centred on a
    feasible visit time; their width is drawn per customer.
    """
    if family not in SOLOMON_FAMILIES:
        raise ValueError(f"unknown family {family!r}")
    rng = np.random.default_rng([seed, SOLOMON_FAMILIES.index(family)])
    capacity, horizon, service = {
        "R2": (1000.0, 1000.0, 10.0),
        "C2": (700.0, 3390.0, 90.0),
        "RC2": (1000.0, 960.0, 10.0),
    }[family]
    depot = Depot(40.0 if family != "R2" else 35.0, 50.0 if family != "R2" else 35.0, 0.0, horizon)

    def clustered(k: int) -> np.ndarray:
        centers = rng.uniform(10.0, 90.0, size=(max(1, k // 8 + 1), 2))
        pick = rng.integers(0, len(centers), size=k)
        return np.clip(centers[pick] + rng.normal(0.0, 5.0, size=(k, 2)), 0.0, 100.0)

    if family == "R2":
        xy = rng.uniform(0.0, 100.0, size=(n_customers, 2))
    elif family == "C2":
        xy = clustered(n_customers)
    else:
        k = n_customers // 2
        xy = np.vstack([clustered(k), rng.uniform(0.0, 100.0, size=(n_customers - k, 2))])
    xy = np.round(xy)

    customers = []
    for i in range(n_customers):
        x, y = xy[i]
        dist = math.hypot(x - depot.x, y - depot.y)
        latest = horizon - service - dist
        center = float(np.round(rng.uniform(dist, latest)))
        width = float(np.round(rng.uniform(*width_range) * horizon))
        lo = max(0.0, center - width / 2.0)
        hi = min(latest, center + width / 2.0)
        hi = max(hi, max(lo, math.ceil(dist)))
        demand = float(rng.integers(1, 41))
        customers.append(Customer(i + 1, float(x), float(y), demand, lo, float(hi), service))
    return VrptwInstance(f"{family}_{n_customers}_{seed}", capacity, depot, tuple(customers))


@dataclass
class Manifest:
    """Record of how a set of instance files was produced."""

    generator: str
    seed: int | None = None
    tighten: float | None = None
    files: list[str] = field(default_factory=list)
    transforms: list[str] = field(default_factory=list)

    def write(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.__dict__, indent=2, sort_keys=True) + "\n")


def write_instances(
    instances: Iterable[VrptwInstance], directory: str | Path, manifest: Manifest
) -> Sequence[Path]:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = []
    for inst in instances:
        p = directory / f"{inst.name}.txt"
        write_instance(inst, p)
        manifest.files.append(p.name)
        paths.append(p)
    manifest.write(directory / "manifest.json")
    return paths
