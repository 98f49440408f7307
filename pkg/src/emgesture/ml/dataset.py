from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..spectrum import AveragePowerSpectrum


class DatasetError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class LabeledDataset:
    features: np.ndarray          # (n_samples, n_dims)
    labels: np.ndarray            # (n_samples,), class ids
    class_names: tuple[str, ...]
    feature_meta: dict = field(default_factory=dict)

    def __post_init__(self):
        X = np.asarray(self.features, dtype=float)
        y = np.asarray(self.labels, dtype=np.int64)
        if X.ndim != 2:
            raise DatasetError("features must be a 2-D matrix")
        if y.shape != (X.shape[0],):
            raise DatasetError(f"{y.size} labels for {X.shape[0]} samples")
        if y.size and (y.min() < 0 or y.max() >= len(self.class_names)):
            raise DatasetError("label outside the class-name range")
        object.__setattr__(self, "features", X)
        object.__setattr__(self, "labels", y)
        object.__setattr__(self, "class_names", tuple(self.class_names))

    @property
    def n_samples(self) -> int:
        return self.features.shape[0]

    @property
    def n_dims(self) -> int:
        return self.features.shape[1]

    def class_counts(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=len(self.class_names))

    def subset(self, idx) -> "LabeledDataset":
        idx = np.asarray(idx, dtype=np.int64)
        return LabeledDataset(self.features[idx], self.labels[idx], self.class_names, dict(self.feature_meta))

    def with_features(self, features: np.ndarray, **meta) -> "LabeledDataset":
        return LabeledDataset(features, self.labels, self.class_names, {**self.feature_meta, **meta})


def from_spectra(spectra: Sequence[AveragePowerSpectrum], class_names: Sequence[str]) -> LabeledDataset:
    """Stack labelled spectra into a dataset; every spectrum needs a known label."""
    if not spectra:
        raise DatasetError("no spectra")
    index = {name: i for i, name in enumerate(class_names)}
    labels = []
    for s in spectra:
        if s.label not in index:
            raise DatasetError(f"spectrum label {s.label!r} is not a known class")
        labels.append(index[s.label])
    X = np.vstack([s.power for s in spectra])
    meta = {
        "bin_width_hz": spectra[0].bin_width_hz,
        "n_subwindows": spectra[0].n_subwindows,
        "source": spectra[0].source.value,
        "pool_width": 1,
    }
    return LabeledDataset(X, np.array(labels), tuple(class_names), meta)


def max_pool(features: np.ndarray, n_bins: int) -> tuple[np.ndarray, int]:
    """Max-pool the last axis down to ``n_bins`` (no-op if already that small).

    Returns the pooled matrix and the pooling width. A trailing remainder that
    does not fill a whole pool is folded into the last bin.
    """
    X = np.asarray(features, dtype=float)
    d = X.shape[-1]
    if n_bins <= 0:
        raise DatasetError("n_bins must be positive")
    if d <= n_bins:
        return X, 1
    width = d // n_bins
    main = X[..., : width * n_bins].reshape(*X.shape[:-1], n_bins, width).max(axis=-1)
    if width * n_bins < d:
        main[..., -1] = np.maximum(main[..., -1], X[..., width * n_bins:].max(axis=-1))
    return main, width


def pool_dataset(ds: LabeledDataset, n_bins: int) -> LabeledDataset:
    pooled, width = max_pool(ds.features, n_bins)
    prior = ds.feature_meta.get("pool_width", 1)
    return ds.with_features(pooled, pool_width=prior * width)


def train_test_split(
    ds: LabeledDataset,
    test_fraction: float = 0.2,
    seed: int = 0,
    stratify: bool = True,
) -> tuple[LabeledDataset, LabeledDataset]:
    """Seeded partition into (train, test).

    Stratified mode gives every class floor(count * fraction) test samples and
    hands the leftover ``round(n * fraction) - sum(floor)`` slots to the
    classes with the largest fractional remainders (seeded tie-break), so each
    class is within one of ``round(count * fraction)``.
    """
    if not 0 < test_fraction < 1:
        raise DatasetError("test_fraction must lie in (0, 1)")
    rng = np.random.default_rng(seed)
    n = ds.n_samples
    if not stratify:
        perm = rng.permutation(n)
        n_test = int(round(n * test_fraction))
        n_test = min(max(n_test, 1), n - 1)
        test_idx = np.sort(perm[:n_test])
        train_idx = np.sort(perm[n_test:])
        return ds.subset(train_idx), ds.subset(test_idx)

    counts = ds.class_counts()
    present = np.flatnonzero(counts)
    if np.any(counts[present] < 2):
        bad = [ds.class_names[c] for c in present if counts[c] < 2]
        raise DatasetError(f"classes with fewer than 2 samples: {bad}")
    exact = counts * test_fraction
    quota = np.floor(exact).astype(int)
    leftover = int(round(n * test_fraction)) - int(quota.sum())
    tiebreak = rng.permutation(len(counts))
    order = sorted(present, key=lambda c: (-(exact[c] - quota[c]), tiebreak[c]))
    for c in order[:max(leftover, 0)]:
        quota[c] += 1
    quota = np.clip(quota, 1, np.maximum(counts - 1, 1))

    test_parts, train_parts = [], []
    for c in present:
        members = np.flatnonzero(ds.labels == c)
        perm = rng.permutation(members)
        test_parts.append(perm[: quota[c]])
        train_parts.append(perm[quota[c]:])
    test_idx = np.sort(np.concatenate(test_parts))
    train_idx = np.sort(np.concatenate(train_parts))
    return ds.subset(train_idx), ds.subset(test_idx)
