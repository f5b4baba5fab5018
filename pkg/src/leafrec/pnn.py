"""Probabilistic neural network: a radial-basis layer over assigned training
vectors and a competitive layer summing activations per class."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

DEFAULT_SPREAD = 0.03


def bias_for_spread(spread: float) -> float:
    """Bias making the radial basis function cross 0.5 at distance spread."""
    if spread <= 0:
        raise ValueError(f"spread must be positive, got {spread}")
    return math.sqrt(math.log(2.0)) / spread


def radbas(n):
    """Radial basis transfer function exp(-n^2); accepts scalars or arrays."""
    return np.exp(-np.square(n))


@dataclass(frozen=True)
class PnnModel:
    weights: np.ndarray        # (Q, R) training vectors, one per row
    bias: np.ndarray           # (Q,) all equal to sqrt(ln 2)/spread
    class_indices: np.ndarray  # (Q,) class index of each training row
    spread: float
    class_names: tuple[str, ...]
    input_dim: int

    @property
    def n_classes(self) -> int:
        return len(self.class_names)

    @property
    def class_matrix(self) -> np.ndarray:
        """(K, Q) 0/1 competitive weights: one 1 per column, at the row class."""
        m = np.zeros((self.n_classes, len(self.class_indices)), dtype=np.float64)
        m[self.class_indices, np.arange(len(self.class_indices))] = 1.0
        return m

    def to_dict(self) -> dict:
        return {
            "spread": self.spread,
            "weights": self.weights.tolist(),
            "class_matrix": self.class_indices.tolist(),
            "class_names": list(self.class_names),
            "input_dim": self.input_dim,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PnnModel":
        return train(
            list(zip(np.asarray(d["weights"], dtype=np.float64), d["class_matrix"])),
            spread=float(d["spread"]),
            class_names=d["class_names"],
        )


@dataclass(frozen=True)
class Activation:
    n: np.ndarray  # (Q,) bias-scaled distances
    a: np.ndarray  # (Q,) radial basis outputs
    d: np.ndarray  # (K,) class scores
    c: np.ndarray  # (K,) one-hot winner


@dataclass(frozen=True)
class RankedClass:
    index: int
    name: str
    score: float
    normalized: float


def ranking_to_dicts(ranking: Sequence[RankedClass]) -> list[dict]:
    return [
        {"class_index": r.index, "class_name": r.name, "score": r.score, "normalized": r.normalized}
        for r in ranking
    ]


def train(
    samples: Sequence[tuple[np.ndarray, int]],
    spread: float = DEFAULT_SPREAD,
    class_names: Sequence[str] | None = None,
) -> PnnModel:
    """Assign training vectors as radial-basis rows; nothing is optimized.

    class_names defaults to "class_0".."class_{K-1}" over the largest index
    seen. Every sample's class index must address a name.
    """
    if not samples:
        raise ValueError("at least one training sample is required")
    vectors = np.asarray([np.asarray(v, dtype=np.float64) for v, _ in samples])
    if vectors.ndim != 2:
        raise ValueError("training vectors must share one dimension")
    indices = np.asarray([int(c) for _, c in samples], dtype=np.int64)
    if class_names is None:
        class_names = [f"class_{i}" for i in range(int(indices.max()) + 1)]
    if indices.min() < 0 or indices.max() >= len(class_names):
        raise ValueError(
            f"class index out of range: got {int(indices.min())}..{int(indices.max())} "
            f"for {len(class_names)} classes"
        )
    q, r = vectors.shape
    return PnnModel(
        weights=vectors,
        bias=np.full(q, bias_for_spread(spread), dtype=np.float64),
        class_indices=indices,
        spread=float(spread),
        class_names=tuple(class_names),
        input_dim=r,
    )


def classify(model: PnnModel, p: np.ndarray, k: int = 1) -> tuple[Activation, list[RankedClass]]:
    """Run the three layers on input p and rank the top-k classes.

    n_i is the bias-scaled Euclidean distance to training row i, a = radbas(n),
    d sums a per class, and the competitive winner is the lowest argmax of d.
    """
    p = np.asarray(p, dtype=np.float64)
    if p.shape != (model.input_dim,):
        raise ValueError(f"input must have shape ({model.input_dim},), got {p.shape}")
    if not np.isfinite(p).all():
        raise ValueError("input contains non-finite entries")
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")

    n = model.bias * np.linalg.norm(model.weights - p, axis=1)
    a = radbas(n)
    d = model.class_matrix @ a
    c = np.zeros(model.n_classes, dtype=np.float64)
    c[int(np.argmax(d))] = 1.0

    total = float(d.sum())
    order = sorted(range(model.n_classes), key=lambda j: (-d[j], j))
    ranking = [
        RankedClass(
            index=j,
            name=model.class_names[j],
            score=float(d[j]),
            normalized=float(d[j]) / total if total > 0 else 0.0,
        )
        for j in order[: min(k, model.n_classes)]
    ]
    return Activation(n=n, a=a, d=d, c=c), ranking
