"""Binary arc classifiers: class-weighted logistic regression and a random forest."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Sequence

import numpy as np

from .features import LAYOUT_VERSION, N_FEATURES, Dataset, apply_minmax, feature_matrix, minmax_stats
from .network import Network

MODEL_FORMAT_VERSION = 1


class ModelError(ValueError):
    pass


@dataclass
class LogisticHyper:
    C: float = 1.0
    class_weight: str | tuple[float, float] = "balanced"
    max_iter: int = 20_000
    tol: float = 1e-6


@dataclass
class ForestHyper:
    n_trees: int = 500
    max_depth: int = 5
    max_features: int = 5
    min_samples_leaf: int = 50
    min_samples_split: int = 100
    class_weight: str | tuple[float, float] = "balanced"
    bootstrap: bool = True
    seed: int = 0


@dataclass
class Tree:
    """Array-encoded CART tree; ``feature == -1`` marks a leaf."""

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray
    n_samples: np.ndarray

    def apply(self, X: np.ndarray) -> np.ndarray:
        node = np.zeros(X.shape[0], dtype=np.int64)
        active = self.feature[node] >= 0
        while active.any():
            idx = np.flatnonzero(active)
            nd = node[idx]
            go_left = X[idx, self.feature[nd]] <= self.threshold[nd]
            node[idx] = np.where(go_left, self.left[nd], self.right[nd])
            active = self.feature[node] >= 0
        return node

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        return self.value[self.apply(X)]

    def depth(self) -> int:
        def rec(k: int) -> int:
            if self.feature[k] < 0:
                return 0
            return 1 + max(rec(self.left[k]), rec(self.right[k]))

        return rec(0)


@dataclass
class TrainedModel:
    kind: str
    norm_stats: np.ndarray
    threshold: float = 0.5
    feature_layout_version: int = LAYOUT_VERSION
    weights: np.ndarray | None = None
    bias: float = 0.0
    trees: list[Tree] = field(default_factory=list)
    hyper: dict = field(default_factory=dict)

    def predict_proba(self, Xn: np.ndarray) -> np.ndarray:
        """Positive-class probabilities for already-normalized rows."""
        Xn = np.atleast_2d(np.asarray(Xn, dtype=np.float64))
        if Xn.shape[1] != N_FEATURES:
            raise ModelError(f"expected {N_FEATURES} features, got {Xn.shape[1]}")
        if self.kind == "logistic":
            return _sigmoid(Xn @ self.weights + self.bias)
        if self.kind == "forest":
            acc = np.zeros(Xn.shape[0])
            for t in self.trees:
                acc += t.predict_proba(Xn)
            return acc / len(self.trees)
        raise ModelError(f"unknown model kind {self.kind!r}")


def identity_stats() -> np.ndarray:
    return np.column_stack([np.zeros(N_FEATURES), np.ones(N_FEATURES)])


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z, dtype=np.float64)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def class_weights(y: np.ndarray, mode) -> np.ndarray:
    y = np.asarray(y)
    if mode == "balanced":
        n = y.size
        counts = np.bincount(y, minlength=2)
        return n / (2.0 * counts)
    if mode in (None, "uniform"):
        return np.ones(2)
    return np.asarray(mode, dtype=np.float64)


def _check_both_classes(data: Dataset) -> None:
    if len(data) == 0:
        raise ModelError("training data is empty")
    if np.unique(data.y).size < 2:
        raise ModelError("training data contains a single class; add more instances")


# ---------------------------------------------------------------------------
# Logistic regression
# ---------------------------------------------------------------------------


def train_logistic(data: Dataset, hyper: LogisticHyper = LogisticHyper()) -> TrainedModel:
    """Class-weighted, L2-regularized logistic regression by fixed-step gradient descent.

    Minimizes ``(1/n) sum_i s_i CE_i + ||w||^2 / (2 C n)`` where ``s_i`` is the
    weight of the sample's class; the step is the inverse of a Lipschitz bound
    of the gradient, so the iteration converges to the unique optimum.
    """
    _check_both_classes(data)
    X = data.X
    y = data.y.astype(np.float64)
    n, d = X.shape
    s = class_weights(data.y, hyper.class_weight)[data.y]
    Xb = np.hstack([X, np.ones((n, 1))])
    lip = 0.25 * s.max() * np.linalg.norm(Xb, 2) ** 2 / n + 1.0 / (hyper.C * n)
    step = 1.0 / lip
    theta = np.zeros(d + 1)
    reg = np.r_[np.full(d, 1.0 / (hyper.C * n)), 0.0]
    for it in range(hyper.max_iter):
        p = _sigmoid(Xb @ theta)
        grad = Xb.T @ (s * (p - y)) / n + reg * theta
        if np.abs(grad).max() < hyper.tol:
            break
        theta -= step * grad
    hp = asdict(hyper)
    hp["iterations"] = it
    return TrainedModel("logistic", identity_stats(), weights=theta[:d].copy(), bias=float(theta[d]), hyper=hp)


# ---------------------------------------------------------------------------
# Random forest
# ---------------------------------------------------------------------------


def _best_split(X, y, w, cnt, feats, min_leaf):
    """Best weighted-Gini split among ``feats``; returns (score, feature, threshold) or None."""
    best = None
    W1 = float((w * y).sum())
    W = float(w.sum())
    for f in feats:
        v = X[:, f]
        order = np.argsort(v, kind="stable")
        vs = v[order]
        ws = w[order]
        w1 = np.cumsum(ws * y[order])
        wl = np.cumsum(ws)
        cl = np.cumsum(cnt[order])
        total = cl[-1]
        # split after position k (left = [0..k])
        k = np.flatnonzero((vs[:-1] < vs[1:]) & (cl[:-1] >= min_leaf) & (total - cl[:-1] >= min_leaf))
        if k.size == 0:
            continue
        lw = wl[k]
        l1 = w1[k]
        rw = W - lw
        r1 = W1 - l1
        # weighted impurity sum: W_L * gini_L + W_R * gini_R
        score = 2.0 * (l1 - l1 * l1 / lw) + 2.0 * (r1 - r1 * r1 / rw)
        b = int(np.argmin(score))
        if best is None or score[b] < best[0]:
            thr = 0.5 * (vs[k[b]] + vs[k[b] + 1])
            best = (float(score[b]), int(f), float(thr))
    return best


def _grow_tree(X, y, cnt, cw, hyper: ForestHyper, rng) -> Tree:
    feature, threshold, left, right, value, n_samples = [], [], [], [], [], []
    w_all = cw[y] * cnt

    def node(idx: np.ndarray, depth: int) -> int:
        k = len(feature)
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        w = w_all[idx]
        w1 = float((w * y[idx]).sum())
        W = float(w.sum())
        value.append(w1 / W if W > 0 else 0.0)
        n_here = int(cnt[idx].sum())
        n_samples.append(n_here)
        pure = w1 == 0.0 or w1 == W
        if depth >= hyper.max_depth or n_here < hyper.min_samples_split or pure:
            return k
        n_feat = min(hyper.max_features, X.shape[1])
        feats = rng.choice(X.shape[1], size=n_feat, replace=False)
        split = _best_split(X[idx], y[idx], w, cnt[idx], feats, hyper.min_samples_leaf)
        if split is None:
            return k
        _, f, thr = split
        go_left = X[idx, f] <= thr
        feature[k] = f
        threshold[k] = thr
        left[k] = node(idx[go_left], depth + 1)
        right[k] = node(idx[~go_left], depth + 1)
        return k

    node(np.flatnonzero(cnt > 0), 0)
    return Tree(
        np.array(feature, dtype=np.int64),
        np.array(threshold),
        np.array(left, dtype=np.int64),
        np.array(right, dtype=np.int64),
        np.array(value),
        np.array(n_samples, dtype=np.int64),
    )


def canonical_order(X: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Row order depending only on row contents (makes training order-invariant)."""
    keys = [y] + [X[:, j] for j in range(X.shape[1] - 1, -1, -1)]
    return np.lexsort(keys)


def train_forest(data: Dataset, hyper: ForestHyper = ForestHyper()) -> TrainedModel:
    """Random forest of class-weighted CART trees on bootstrap resamples."""
    _check_both_classes(data)
    order = canonical_order(data.X, data.y)
    X = np.ascontiguousarray(data.X[order])
    y = data.y[order].astype(np.int64)
    n = len(y)
    cw = class_weights(y, hyper.class_weight)
    trees = []
    for t in range(hyper.n_trees):
        rng = np.random.default_rng([hyper.seed, t])
        if hyper.bootstrap:
            cnt = np.bincount(rng.integers(0, n, size=n), minlength=n).astype(np.float64)
        else:
            cnt = np.ones(n)
        trees.append(_grow_tree(X, y, cnt, cw, hyper, rng))
    return TrainedModel("forest", identity_stats(), trees=trees, hyper=asdict(hyper))


# ---------------------------------------------------------------------------
# Prediction and evaluation
# ---------------------------------------------------------------------------


def predict(model: TrainedModel, raw_features: Sequence[float], norm_stats: np.ndarray | None = None,
            layout_version: int = LAYOUT_VERSION) -> tuple[float, int]:
    """Probability and keep decision (``prob >= threshold``) for one arc."""
    if layout_version != model.feature_layout_version:
        raise ModelError(
            f"feature layout {layout_version} does not match model layout {model.feature_layout_version}"
        )
    stats = model.norm_stats if norm_stats is None else norm_stats
    x = apply_minmax(np.asarray(raw_features, dtype=np.float64)[None, :], stats)
    prob = float(model.predict_proba(x)[0])
    return prob, int(prob >= model.threshold)


def predict_network(model: TrainedModel, net: Network) -> tuple[np.ndarray, np.ndarray]:
    """Per-arc probabilities and keep mask for ``net``, normalizing on the instance itself.

    Depot arcs get probability 1 and are always kept.
    """
    ids, X = feature_matrix(net)
    probs = np.ones(net.n_arcs)
    if ids.size:
        probs[ids] = model.predict_proba(apply_minmax(X, minmax_stats(X)))
    return probs, probs >= model.threshold


@dataclass
class Metrics:
    tp: int
    fn: int
    tn: int
    fp: int

    @property
    def confusion(self) -> tuple[int, int, int, int]:
        return self.tp, self.fn, self.tn, self.fp

    def _recall(self) -> Fraction:
        return Fraction(self.tp, self.tp + self.fn) if self.tp + self.fn else Fraction(0)

    def _tnr(self) -> Fraction:
        return Fraction(self.tn, self.tn + self.fp) if self.tn + self.fp else Fraction(0)

    @property
    def recall(self) -> float:
        return float(self._recall())

    @property
    def tnr(self) -> float:
        return float(self._tnr())

    @property
    def balanced_accuracy_exact(self) -> Fraction:
        return (self._recall() + self._tnr()) / 2

    @property
    def balanced_accuracy(self) -> float:
        return float(self.balanced_accuracy_exact)

    def summary(self) -> str:
        return (
            f"recall {self.recall:.4f}  tnr {self.tnr:.4f}  balanced_accuracy {self.balanced_accuracy:.4f}  "
            f"(tp={self.tp} fn={self.fn} tn={self.tn} fp={self.fp})"
        )


def metrics_from_predictions(y_true: np.ndarray, y_pred: np.ndarray) -> Metrics:
    y_true = np.asarray(y_true).astype(bool)
    y_pred = np.asarray(y_pred).astype(bool)
    return Metrics(
        int((y_true & y_pred).sum()),
        int((y_true & ~y_pred).sum()),
        int((~y_true & ~y_pred).sum()),
        int((~y_true & y_pred).sum()),
    )


def evaluate(model: TrainedModel, data: Dataset) -> Metrics:
    """Confusion-matrix metrics of ``model`` on normalized samples."""
    if len(data) == 0:
        raise ModelError("evaluation data is empty")
    keep = model.predict_proba(apply_minmax(data.X, model.norm_stats)) >= model.threshold
    return metrics_from_predictions(data.y, keep)


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------


def _floats(a) -> list[float]:
    return [float(v) for v in np.asarray(a, dtype=np.float64).ravel()]


def save_model(model: TrainedModel, path: str | Path) -> None:
    doc = {
        "format_version": MODEL_FORMAT_VERSION,
        "kind": model.kind,
        "feature_layout_version": model.feature_layout_version,
        "threshold": model.threshold,
        "norm_stats": [_floats(r) for r in model.norm_stats],
        "hyper": model.hyper,
    }
    if model.kind == "logistic":
        doc["weights"] = _floats(model.weights)
        doc["bias"] = float(model.bias)
    else:
        doc["trees"] = [
            {
                "feature": t.feature.tolist(),
                "threshold": _floats(t.threshold),
                "left": t.left.tolist(),
                "right": t.right.tolist(),
                "value": _floats(t.value),
                "n_samples": t.n_samples.tolist(),
            }
            for t in model.trees
        ]
    # json writes floats with repr, the shortest string that round-trips exactly
    Path(path).write_text(json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n")


def load_model(path: str | Path) -> TrainedModel:
    doc = json.loads(Path(path).read_text())
    version = doc.get("format_version")
    if version != MODEL_FORMAT_VERSION:
        raise ModelError(f"unsupported model format version {version!r}")
    if doc["kind"] not in ("logistic", "forest"):
        raise ModelError(f"unknown model kind {doc['kind']!r}")
    model = TrainedModel(
        doc["kind"],
        np.array(doc["norm_stats"], dtype=np.float64),
        threshold=float(doc["threshold"]),
        feature_layout_version=int(doc["feature_layout_version"]),
        hyper=doc.get("hyper", {}),
    )
    if model.kind == "logistic":
        model.weights = np.array(doc["weights"], dtype=np.float64)
        model.bias = float(doc["bias"])
    else:
        model.trees = [
            Tree(
                np.array(t["feature"], dtype=np.int64),
                np.array(t["threshold"], dtype=np.float64),
                np.array(t["left"], dtype=np.int64),
                np.array(t["right"], dtype=np.int64),
                np.array(t["value"], dtype=np.float64),
                np.array(t["n_samples"], dtype=np.int64),
            )
            for t in doc["trees"]
        ]
    return model
