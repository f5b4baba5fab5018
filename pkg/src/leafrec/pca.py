"""Principal component analysis: z-scored covariance eigendecomposition and
the trained projection into the reduced space."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DEFAULT_COMPONENTS = 5


@dataclass(frozen=True)
class PcaModel:
    mean: np.ndarray       # (F,) per-feature training mean
    scale: np.ndarray      # (F,) per-feature training standard deviation
    loadings: np.ndarray   # (F, m) orthonormal eigenvector columns
    explained: np.ndarray  # (m,) explained-variance fractions, nonincreasing
    m: int

    def to_dict(self) -> dict:
        return {
            "mean": self.mean.tolist(),
            "scale": self.scale.tolist(),
            "loadings": self.loadings.tolist(),
            "explained": self.explained.tolist(),
            "m": self.m,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PcaModel":
        return cls(
            mean=np.asarray(d["mean"], dtype=np.float64),
            scale=np.asarray(d["scale"], dtype=np.float64),
            loadings=np.asarray(d["loadings"], dtype=np.float64),
            explained=np.asarray(d["explained"], dtype=np.float64),
            m=int(d["m"]),
        )


def fit(data: np.ndarray, m: int = DEFAULT_COMPONENTS) -> PcaModel:
    """Fit a PCA model on an (N, F) matrix.

    Columns are z-scored (sample standard deviation), the covariance of the
    standardized data (divisor N-1) is eigendecomposed, and the top-m
    eigenvectors are kept with the largest-magnitude entry of each made
    positive. Explained fractions are eigenvalues over the eigenvalue sum.
    """
    data = np.asarray(data, dtype=np.float64)
    if data.ndim != 2:
        raise ValueError(f"data must be a 2-d matrix, got shape {data.shape}")
    n, n_features = data.shape
    if n < 2:
        raise ValueError(f"insufficient data: need at least 2 samples, got {n}")
    if not 1 <= m <= n_features:
        raise ValueError(f"m must lie in [1, {n_features}], got {m}")
    if not np.isfinite(data).all():
        raise ValueError("data contains non-finite entries")

    mean = data.mean(axis=0)
    scale = data.std(axis=0, ddof=1)
    dead = np.flatnonzero(scale == 0)
    if dead.size:
        raise ValueError(f"feature column {int(dead[0])} has zero variance")

    z = (data - mean) / scale
    cov = (z.T @ z) / (n - 1)
    eigvals, eigvecs = np.linalg.eigh(cov)
    order = np.argsort(eigvals)[::-1]
    eigvals = np.clip(eigvals[order], 0.0, None)
    eigvecs = eigvecs[:, order]

    loadings = eigvecs[:, :m].copy()
    for col in range(m):
        peak = int(np.argmax(np.abs(loadings[:, col])))
        if loadings[peak, col] < 0:
            loadings[:, col] = -loadings[:, col]

    explained = eigvals[:m] / eigvals.sum()
    return PcaModel(mean=mean, scale=scale, loadings=loadings, explained=explained, m=int(m))


def project(model: PcaModel, v: np.ndarray) -> np.ndarray:
    """Project a feature vector (F,) or matrix (N, F) into component space."""
    v = np.asarray(v, dtype=np.float64)
    if not np.isfinite(v).all():
        raise ValueError("input contains non-finite entries")
    if v.shape[-1] != model.mean.shape[0]:
        raise ValueError(f"expected {model.mean.shape[0]} features, got {v.shape[-1]}")
    return ((v - model.mean) / model.scale) @ model.loadings
