"""Random forest of Gini decision trees, written out in numpy.

Each tree is grown on a bootstrap resample; at every node a fresh random
subset of features is searched for the threshold with the lowest weighted
Gini impurity. Trees are stored as flat node arrays so they serialise to
JSON directly.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Union

import numpy as np

from .dataset import DatasetError, LabeledDataset

FeatureRule = Union[str, int]


@dataclass(frozen=True)
class ForestParams:
    n_trees: int = 100
    max_depth: int | None = None
    min_samples_leaf: int = 1
    features_per_split: FeatureRule = "sqrt"
    seed: int = 0
    bootstrap: bool = True

    def __post_init__(self):
        if self.n_trees < 1:
            raise ValueError("n_trees must be >= 1")
        if self.max_depth is not None and self.max_depth < 1:
            raise ValueError("max_depth must be positive or None")
        if self.min_samples_leaf < 1:
            raise ValueError("min_samples_leaf must be >= 1")
        rule = self.features_per_split
        if isinstance(rule, str) and rule not in ("sqrt", "log2", "all"):
            raise ValueError(f"unknown features_per_split rule {rule!r}")
        if not isinstance(rule, str) and int(rule) < 1:
            raise ValueError("fixed features_per_split must be >= 1")

    def n_candidates(self, n_dims: int) -> int:
        rule = self.features_per_split
        if rule == "sqrt":
            m = int(math.sqrt(n_dims))
        elif rule == "log2":
            m = int(math.log2(n_dims)) if n_dims > 1 else 1
        elif rule == "all":
            m = n_dims
        else:
            m = int(rule)
        return min(max(m, 1), n_dims)


@dataclass(eq=False)
class DecisionTree:
    """Flat binary tree; ``feature[i] == -1`` marks a leaf."""

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray  # (n_nodes, n_classes) training-sample histogram

    @property
    def n_nodes(self) -> int:
        return self.feature.size

    def apply(self, X: np.ndarray) -> np.ndarray:
        """Leaf index reached by each row of ``X``."""
        X = np.atleast_2d(X)
        node = np.zeros(X.shape[0], dtype=np.int64)
        active = self.feature[node] >= 0
        rows = np.arange(X.shape[0])
        while np.any(active):
            r = rows[active]
            nd = node[r]
            go_left = X[r, self.feature[nd]] <= self.threshold[nd]
            node[r] = np.where(go_left, self.left[nd], self.right[nd])
            active = self.feature[node] >= 0
        return node

    def predict(self, X: np.ndarray) -> np.ndarray:
        # argmax picks the lowest class id on ties
        return np.argmax(self.value[self.apply(X)], axis=1)

    def to_dict(self) -> dict:
        return {
            "feature": self.feature.tolist(),
            "threshold": self.threshold.tolist(),
            "left": self.left.tolist(),
            "right": self.right.tolist(),
            "value": self.value.astype(int).tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DecisionTree":
        return cls(
            feature=np.array(d["feature"], dtype=np.int64),
            threshold=np.array(d["threshold"], dtype=float),
            left=np.array(d["left"], dtype=np.int64),
            right=np.array(d["right"], dtype=np.int64),
            value=np.array(d["value"], dtype=float).reshape(len(d["feature"]), -1),
        )


def _best_split(Xn: np.ndarray, yn: np.ndarray, n_classes: int, min_leaf: int):
    """Lowest weighted-Gini threshold over the columns of ``Xn``.

    Returns ``(column, threshold)`` or ``None`` when no column admits a split
    leaving at least ``min_leaf`` samples on each side.
    """
    n, m = Xn.shape
    if n < 2 * min_leaf:
        return None
    order = np.argsort(Xn, axis=0, kind="stable")
    xs = np.take_along_axis(Xn, order, axis=0)
    onehot = np.eye(n_classes)[yn]                      # (n, C)
    left_counts = np.cumsum(onehot[order], axis=0)[:-1]  # (n-1, m, C)
    total = onehot.sum(axis=0)
    right_counts = total - left_counts
    n_left = np.arange(1, n)[:, None].astype(float)
    n_right = n - n_left
    gini_left = 1.0 - (left_counts ** 2).sum(axis=2) / n_left ** 2
    gini_right = 1.0 - (right_counts ** 2).sum(axis=2) / n_right ** 2
    impurity = (n_left * gini_left + n_right * gini_right) / n
    valid = xs[1:] > xs[:-1]
    if min_leaf > 1:
        valid &= (n_left >= min_leaf) & (n_right >= min_leaf)
    if not valid.any():
        return None
    impurity = np.where(valid, impurity, np.inf)
    # candidate order first, then split position
    flat = np.argmin(impurity.T)
    col, pos = divmod(int(flat), n - 1)
    thr = 0.5 * (xs[pos, col] + xs[pos + 1, col])
    if not thr < xs[pos + 1, col]:
        # midpoint rounded up onto the right value; fall back to the left value
        thr = xs[pos, col]
    return col, thr


def grow_tree(
    X: np.ndarray,
    y: np.ndarray,
    n_classes: int,
    n_candidates: int,
    rng: np.random.Generator,
    max_depth: int | None = None,
    min_samples_leaf: int = 1,
) -> DecisionTree:
    n_dims = X.shape[1]
    feature, threshold, left, right, value = [], [], [], [], []

    def new_node(idx):
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        value.append(np.bincount(y[idx], minlength=n_classes))
        return len(feature) - 1

    root = new_node(np.arange(y.size))
    stack = [(root, np.arange(y.size), 0)]
    while stack:
        node, idx, depth = stack.pop()
        counts = value[node]
        if np.count_nonzero(counts) <= 1:
            continue
        if max_depth is not None and depth >= max_depth:
            continue
        if n_candidates >= n_dims:
            feats = np.arange(n_dims)
        else:
            feats = np.sort(rng.choice(n_dims, size=n_candidates, replace=False))
        found = _best_split(X[np.ix_(idx, feats)], y[idx], n_classes, min_samples_leaf)
        if found is None:
            continue
        col, thr = found
        f = int(feats[col])
        mask = X[idx, f] <= thr
        l_idx, r_idx = idx[mask], idx[~mask]
        feature[node], threshold[node] = f, float(thr)
        left[node] = new_node(l_idx)
        right[node] = new_node(r_idx)
        # right pushed first so the left subtree is expanded first
        stack.append((right[node], r_idx, depth + 1))
        stack.append((left[node], l_idx, depth + 1))

    return DecisionTree(
        feature=np.array(feature, dtype=np.int64),
        threshold=np.array(threshold, dtype=float),
        left=np.array(left, dtype=np.int64),
        right=np.array(right, dtype=np.int64),
        value=np.array(value, dtype=float),
    )


@dataclass(eq=False)
class ForestModel:
    trees: list[DecisionTree]
    params: ForestParams
    class_names: tuple[str, ...]
    n_dims: int
    feature_meta: dict = field(default_factory=dict)
    oob_estimate: float | None = None
    degenerate: bool = False
    name: str = "rf"

    @property
    def n_classes(self) -> int:
        return len(self.class_names)

    def votes(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.n_dims:
            raise DatasetError(f"feature vector has {X.shape[1]} dims, model expects {self.n_dims}")
        tally = np.zeros((X.shape[0], self.n_classes), dtype=np.int64)
        rows = np.arange(X.shape[0])
        for tree in self.trees:
            np.add.at(tally, (rows, tree.predict(X)), 1)
        return tally

    def predict(self, X: np.ndarray) -> np.ndarray:
        return np.argmax(self.votes(X), axis=1)

    def to_dict(self) -> dict:
        return {
            "model": self.name,
            "params": asdict(self.params),
            "class_names": list(self.class_names),
            "n_dims": self.n_dims,
            "feature_meta": self.feature_meta,
            "oob_estimate": self.oob_estimate,
            "degenerate": self.degenerate,
            "trees": [t.to_dict() for t in self.trees],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ForestModel":
        return cls(
            trees=[DecisionTree.from_dict(t) for t in d["trees"]],
            params=ForestParams(**d["params"]),
            class_names=tuple(d["class_names"]),
            n_dims=int(d["n_dims"]),
            feature_meta=d.get("feature_meta", {}),
            oob_estimate=d.get("oob_estimate"),
            degenerate=bool(d.get("degenerate", False)),
        )

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, sort_keys=True)
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "ForestModel":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


def rf_train(train: LabeledDataset, p: ForestParams | None = None, compute_oob: bool = False) -> ForestModel:
    p = p or ForestParams()
    X, y = train.features, train.labels
    n, d = X.shape
    if n < 2:
        raise DatasetError("need at least 2 training samples")
    n_classes = len(train.class_names)
    present = np.unique(y)
    meta = dict(train.feature_meta)
    if present.size < 2:
        # single class: one leaf holding every sample
        leaf = DecisionTree(
            feature=np.array([-1]), threshold=np.array([0.0]),
            left=np.array([-1]), right=np.array([-1]),
            value=np.bincount(y, minlength=n_classes)[None, :].astype(float),
        )
        return ForestModel([leaf], p, train.class_names, d, meta, None, degenerate=True)

    m = p.n_candidates(d)
    trees = []
    in_bag = np.zeros((p.n_trees, n), dtype=bool)
    for t in range(p.n_trees):
        rng = np.random.default_rng(p.seed + t)
        if p.bootstrap:
            idx = rng.integers(0, n, size=n)
        else:
            idx = np.arange(n)
        in_bag[t, idx] = True
        trees.append(grow_tree(X[idx], y[idx], n_classes, m, rng, p.max_depth, p.min_samples_leaf))
    model = ForestModel(trees, p, train.class_names, d, meta)
    if compute_oob and p.bootstrap:
        model.oob_estimate = _oob_accuracy(model, X, y, in_bag)
    return model


def _oob_accuracy(model: ForestModel, X, y, in_bag) -> float | None:
    tally = np.zeros((X.shape[0], model.n_classes), dtype=np.int64)
    for t, tree in enumerate(model.trees):
        out = np.flatnonzero(~in_bag[t])
        if out.size:
            np.add.at(tally, (out, tree.predict(X[out])), 1)
    scored = tally.sum(axis=1) > 0
    if not scored.any():
        return None
    return float(np.mean(np.argmax(tally[scored], axis=1) == y[scored]))


def rf_predict(m: ForestModel, x) -> tuple[int, dict[int, int]]:
    """Majority vote for one feature vector; ties go to the lowest class id."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise DatasetError("rf_predict takes a single feature vector")
    tally = m.votes(x[None, :])[0]
    hist = {int(c): int(v) for c, v in enumerate(tally) if v}
    return int(np.argmax(tally)), hist
