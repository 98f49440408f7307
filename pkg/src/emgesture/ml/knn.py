from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .dataset import DatasetError, LabeledDataset
from .pca import PCAModel, pca_fit


def knn_predict(train: LabeledDataset, x, k: int) -> int:
    """Majority label among the ``k`` nearest training points (Euclidean).

    Equal distances are ordered by training-sample index; equal vote counts go
    to the lowest class id.
    """
    return int(_knn_batch(train.features, train.labels, len(train.class_names),
                          np.atleast_2d(np.asarray(x, dtype=float)), k)[0])


def _knn_batch(Xtr, ytr, n_classes, Xq, k) -> np.ndarray:
    if k < 1:
        raise DatasetError("k must be >= 1")
    if k > Xtr.shape[0]:
        raise DatasetError(f"k={k} exceeds the {Xtr.shape[0]} training samples")
    if Xq.shape[1] != Xtr.shape[1]:
        raise DatasetError("query dimension does not match training features")
    # squared distances via the expansion are fast but lose exact ties; use the
    # direct difference in chunks so equal distances compare equal
    out = np.empty(Xq.shape[0], dtype=np.int64)
    chunk = max(1, 2_000_000 // max(Xtr.size, 1))
    for s in range(0, Xq.shape[0], chunk):
        q = Xq[s:s + chunk]
        d2 = ((q[:, None, :] - Xtr[None, :, :]) ** 2).sum(axis=2)
        nearest = np.argsort(d2, axis=1, kind="stable")[:, :k]
        for r, idx in enumerate(nearest):
            out[s + r] = int(np.argmax(np.bincount(ytr[idx], minlength=n_classes)))
    return out


@dataclass(eq=False)
class KNNClassifier:
    """KNN on (optionally) PCA-reduced features; the baseline classifier."""

    train_features: np.ndarray
    train_labels: np.ndarray
    class_names: tuple[str, ...]
    k: int = 5
    pca: PCAModel | None = None
    feature_meta: dict | None = None

    @property
    def name(self) -> str:
        return f"knn-pca{self.pca.n_components}" if self.pca is not None else "knn"

    @classmethod
    def fit(cls, train: LabeledDataset, k: int = 5, n_components: int | None = 64) -> "KNNClassifier":
        if n_components:
            n_components = min(n_components, train.n_samples, train.n_dims)
            pca = pca_fit(train, n_components)
            feats = pca.transform(train.features)
        else:
            pca, feats = None, train.features
        if k > train.n_samples:
            raise DatasetError(f"k={k} exceeds the {train.n_samples} training samples")
        return cls(feats, train.labels.copy(), train.class_names, k, pca, dict(train.feature_meta))

    def predict(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if self.pca is not None:
            X = self.pca.transform(X)
        return _knn_batch(self.train_features, self.train_labels, len(self.class_names), X, self.k)

    def to_dict(self) -> dict:
        return {
            "model": "knn",
            "k": self.k,
            "class_names": list(self.class_names),
            "feature_meta": self.feature_meta or {},
            "train_features": self.train_features.tolist(),
            "train_labels": self.train_labels.tolist(),
            "pca": None if self.pca is None else self.pca.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "KNNClassifier":
        return cls(
            train_features=np.array(d["train_features"], dtype=float),
            train_labels=np.array(d["train_labels"], dtype=np.int64),
            class_names=tuple(d["class_names"]),
            k=int(d["k"]),
            pca=None if d.get("pca") is None else PCAModel.from_dict(d["pca"]),
            feature_meta=d.get("feature_meta", {}),
        )

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, sort_keys=True)
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "KNNClassifier":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))
