"""Static per-arc features, instance-wise min-max normalization and dataset files."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np

from .network import LOAD, TIME, Network

LAYOUT_VERSION = 1

FEATURE_NAMES = (
    "cost",
    "time",
    "load",
    "tail_out_degree",
    "head_in_degree",
    "tail_out_time_min",
    "tail_out_time_max",
    "tail_out_time_avg",
    "tail_out_load_min",
    "tail_out_load_max",
    "tail_out_load_avg",
    "head_in_time_min",
    "head_in_time_max",
    "head_in_time_avg",
    "head_in_load_min",
    "head_in_load_max",
    "head_in_load_avg",
    "head_window_lo",
    "head_window_hi",
    "tail_window_lo",
    "tail_window_hi",
)
N_FEATURES = len(FEATURE_NAMES)


@dataclass(frozen=True)
class ArcSample:
    instance_id: str
    arc_id: int
    features: tuple[float, ...]
    label: int


def _stats(values: np.ndarray) -> tuple[float, float, float]:
    return float(values.min()), float(values.max()), float(values.mean())


def extract_features(net: Network, arc_id: int) -> np.ndarray:
    """Raw feature vector of a customer-to-customer arc.

    Degrees and min/max/avg aggregates are taken over the customer-to-customer
    arcs of ``net`` (pass the full network, not a reduced one).
    """
    a = net.arcs[arc_id]
    if net.is_depot_arc(arc_id):
        raise ValueError(f"arc {arc_id} ({a.tail}->{a.head}) touches the depot and is never sampled")
    sel = net.selectable_mask()
    out_ids = [k for k in net.out_adj[a.tail] if sel[k]]
    in_ids = [k for k in net.in_adj[a.head] if sel[k]]
    v = [a.cost, a.consumption[TIME], a.consumption[LOAD], float(len(out_ids)), float(len(in_ids))]
    for ids in (out_ids, in_ids):
        v += _stats(net.arc_time[ids])
        v += _stats(net.arc_load[ids])
    v += [net.win_lo[a.head, TIME], net.win_hi[a.head, TIME]]
    v += [net.win_lo[a.tail, TIME], net.win_hi[a.tail, TIME]]
    return np.array(v, dtype=np.float64)


def feature_matrix(net: Network) -> tuple[np.ndarray, np.ndarray]:
    """``(arc_ids, X)`` for every selectable arc of ``net``, in arc-id order."""
    ids = np.flatnonzero(net.selectable_mask())
    X = np.empty((ids.size, N_FEATURES))
    for r, k in enumerate(ids):
        X[r] = extract_features(net, int(k))
    return ids, X


def minmax_stats(X: np.ndarray) -> np.ndarray:
    """Per-feature ``(min, max)`` pairs, shape ``(n_features, 2)``."""
    X = np.asarray(X, dtype=np.float64)
    if X.shape[0] == 0:
        raise ValueError("cannot normalize an empty sample set")
    return np.column_stack([X.min(axis=0), X.max(axis=0)])


def apply_minmax(X: np.ndarray, stats: np.ndarray) -> np.ndarray:
    """``(v - min) / (max - min)``; constant features map to 0."""
    lo = stats[:, 0]
    span = stats[:, 1] - lo
    safe = np.where(span > 0, span, 1.0)
    return np.where(span > 0, (np.asarray(X, dtype=np.float64) - lo) / safe, 0.0)


@dataclass
class Dataset:
    """Column-oriented collection of arc samples."""

    instance_ids: list[str]
    arc_ids: np.ndarray
    X: np.ndarray
    y: np.ndarray

    def __len__(self) -> int:
        return len(self.instance_ids)

    def __iter__(self) -> Iterator[ArcSample]:
        for i in range(len(self)):
            yield ArcSample(self.instance_ids[i], int(self.arc_ids[i]), tuple(self.X[i]), int(self.y[i]))

    @classmethod
    def empty(cls) -> "Dataset":
        return cls([], np.zeros(0, dtype=np.int64), np.zeros((0, N_FEATURES)), np.zeros(0, dtype=np.int64))

    @classmethod
    def from_samples(cls, samples: Sequence[ArcSample]) -> "Dataset":
        if not samples:
            return cls.empty()
        return cls(
            [s.instance_id for s in samples],
            np.array([s.arc_id for s in samples], dtype=np.int64),
            np.array([s.features for s in samples], dtype=np.float64),
            np.array([s.label for s in samples], dtype=np.int64),
        )

    def subset(self, rows: np.ndarray) -> "Dataset":
        rows = np.asarray(rows, dtype=np.int64)
        return Dataset([self.instance_ids[r] for r in rows], self.arc_ids[rows], self.X[rows], self.y[rows])

    def instances(self) -> list[str]:
        return sorted(set(self.instance_ids))

    @staticmethod
    def concat(parts: Sequence["Dataset"]) -> "Dataset":
        parts = [p for p in parts if len(p)]
        if not parts:
            return Dataset.empty()
        return Dataset(
            [i for p in parts for i in p.instance_ids],
            np.concatenate([p.arc_ids for p in parts]),
            np.vstack([p.X for p in parts]),
            np.concatenate([p.y for p in parts]),
        )


def normalize_instance(data: Dataset) -> tuple[Dataset, np.ndarray]:
    """Min-max scale the samples of one instance; returns the scaled set and its stats."""
    if len(data) == 0:
        raise ValueError("cannot normalize an empty sample set")
    if len(set(data.instance_ids)) != 1:
        raise ValueError("samples span several instances")
    stats = minmax_stats(data.X)
    return Dataset(list(data.instance_ids), data.arc_ids.copy(), apply_minmax(data.X, stats), data.y.copy()), stats


def instance_samples(instance_id: str, net: Network, y: np.ndarray | None = None) -> Dataset:
    """Raw (unnormalized) samples of every selectable arc of ``net``."""
    ids, X = feature_matrix(net)
    labels = np.zeros(ids.size, dtype=np.int64) if y is None else np.asarray(y, dtype=np.int64)[ids]
    return Dataset([instance_id] * ids.size, ids.astype(np.int64), X, labels)


def build_dataset(runs: Sequence[tuple[str, Network, np.ndarray]]) -> Dataset:
    """Normalized samples for ``(instance_id, network, per-arc labels)`` runs."""
    parts = []
    for instance_id, net, y in runs:
        if len(y) != net.n_arcs:
            raise ValueError(f"{instance_id}: labels do not align with the network arcs")
        raw = instance_samples(instance_id, net, y)
        if len(raw):
            parts.append(normalize_instance(raw)[0])
    return Dataset.concat(parts)


HEADER = ("instance_id", "arc_id", *FEATURE_NAMES, "label")


def write_dataset(data: Dataset, path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(HEADER)
        for i in range(len(data)):
            w.writerow(
                [data.instance_ids[i], int(data.arc_ids[i])]
                + [format(float(v), ".17g") for v in data.X[i]]
                + [int(data.y[i])]
            )


def read_dataset(path: str | Path) -> Dataset:
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        header = next(r, None)
        if header is None or tuple(header) != HEADER:
            raise ValueError(f"{path}: unexpected dataset header (layout version {LAYOUT_VERSION})")
        samples = [
            ArcSample(row[0], int(row[1]), tuple(float(v) for v in row[2:-1]), int(row[-1])) for row in r
        ]
    return Dataset.from_samples(samples)
