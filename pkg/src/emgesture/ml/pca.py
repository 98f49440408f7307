"""Principal component analysis by power iteration with deflation."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import DatasetError, LabeledDataset


@dataclass(eq=False)
class PCAModel:
    mean: np.ndarray                  # (d,)
    components: np.ndarray            # (n_components, d), orthonormal rows
    explained_variance: np.ndarray    # (n_components,)
    explained_variance_ratio: np.ndarray

    @property
    def n_components(self) -> int:
        return self.components.shape[0]

    def transform(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        return (X - self.mean) @ self.components.T

    def to_dict(self) -> dict:
        return {
            "mean": self.mean.tolist(),
            "components": self.components.tolist(),
            "explained_variance": self.explained_variance.tolist(),
            "explained_variance_ratio": self.explained_variance_ratio.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PCAModel":
        return cls(*(np.array(d[k], dtype=float) for k in
                     ("mean", "components", "explained_variance", "explained_variance_ratio")))


def top_eigenpairs(A: np.ndarray, k: int, tol: float = 1e-10, max_iter: int = 20000, seed: int = 0):
    """Leading ``k`` eigenpairs of a symmetric PSD matrix.

    Power iteration finds the dominant vector, which is then deflated out
    (Hotelling); converged vectors are re-orthogonalised against earlier ones
    to keep round-off from reintroducing them. Convergence is declared when the
    eigenvector moves less than ``tol`` (up to sign).
    """
    A = np.array(A, dtype=float)
    n = A.shape[0]
    rng = np.random.default_rng(seed)
    vals = np.zeros(k)
    vecs = np.zeros((k, n))
    scale = max(np.abs(np.diag(A)).max(), np.finfo(float).tiny)
    for i in range(k):
        v = rng.standard_normal(n)
        v -= vecs[:i].T @ (vecs[:i] @ v)
        v /= np.linalg.norm(v)
        lam = 0.0
        for _ in range(max_iter):
            w = A @ v
            w -= vecs[:i].T @ (vecs[:i] @ w)
            norm = np.linalg.norm(w)
            if norm <= 1e-14 * scale:
                # remaining spectrum is numerically zero
                lam = 0.0
                break
            w /= norm
            if w @ v < 0:
                w = -w
            delta = np.linalg.norm(w - v)
            v = w
            lam = norm
            if delta < tol:
                break
        lam = float(v @ A @ v)
        vals[i] = max(lam, 0.0)
        vecs[i] = v
        A = A - lam * np.outer(v, v)
    return vals, vecs


def pca_fit(train: LabeledDataset | np.ndarray, n_components: int, tol: float = 1e-10) -> PCAModel:
    X = train.features if isinstance(train, LabeledDataset) else np.asarray(train, dtype=float)
    n, d = X.shape
    if n_components < 1 or n_components > min(n, d):
        raise DatasetError(f"n_components={n_components} exceeds min(n_samples, n_dims)={min(n, d)}")
    mean = X.mean(axis=0)
    Xc = X - mean
    denom = max(n - 1, 1)
    total_var = float((Xc ** 2).sum() / denom)
    if d <= n:
        cov = Xc.T @ Xc / denom
        vals, comps = top_eigenpairs(cov, n_components, tol)
    else:
        # eigenvectors of the n x n Gram matrix map onto those of the covariance
        gram = Xc @ Xc.T / denom
        vals, g = top_eigenpairs(gram, n_components, tol)
        comps = g @ Xc
        norms = np.linalg.norm(comps, axis=1)
        comps = comps / np.where(norms > 0, norms, 1.0)[:, None]
    ratio = vals / total_var if total_var > 0 else np.zeros_like(vals)
    return PCAModel(mean, comps, vals, ratio)


def pca_transform(m: PCAModel, x) -> np.ndarray:
    return m.transform(x)
