"""Basic geometric leaf features: diameter, physiological length/width,
area and perimeter."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np


class PixelPoint(NamedTuple):
    x: int
    y: int


@dataclass(frozen=True)
class TerminalPair:
    """The two human-marked endpoints of the main vein."""

    a: PixelPoint
    b: PixelPoint

    def __post_init__(self):
        object.__setattr__(self, "a", PixelPoint(int(self.a[0]), int(self.a[1])))
        object.__setattr__(self, "b", PixelPoint(int(self.b[0]), int(self.b[1])))
        if self.a == self.b:
            raise ValueError(f"terminal pair is degenerate: both points are {tuple(self.a)}")

    @classmethod
    def from_dict(cls, d: dict) -> "TerminalPair":
        return cls(PixelPoint(d["a"]["x"], d["a"]["y"]), PixelPoint(d["b"]["x"], d["b"]["y"]))

    def to_dict(self) -> dict:
        return {"a": {"x": self.a.x, "y": self.a.y}, "b": {"x": self.b.x, "y": self.b.y}}


@dataclass(frozen=True)
class BasicFeatures:
    diameter: float
    phys_length: float
    phys_width: float
    area: int
    perimeter: int


def _margin_points(margin: np.ndarray) -> np.ndarray:
    """(N, 2) int array of (x, y) pixel coordinates of the 1-pixels."""
    ys, xs = np.nonzero(np.asarray(margin))
    return np.column_stack([xs, ys]).astype(np.int64)


def _turn(p, q, r) -> int:
    """Positive when p-q-r turns clockwise in image coordinates (y down)."""
    return (q[1] - p[1]) * (r[0] - p[0]) - (q[0] - p[0]) * (r[1] - p[1])


def _hull_chains(points: list[tuple[int, int]]) -> tuple[list, list]:
    """Monotone-chain upper and lower hulls of sorted unique points."""
    upper: list[tuple[int, int]] = []
    lower: list[tuple[int, int]] = []
    for p in points:
        while len(upper) > 1 and _turn(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        while len(lower) > 1 and _turn(lower[-2], lower[-1], p) >= 0:
            lower.pop()
        upper.append(p)
        lower.append(p)
    return upper, lower


def _antipodal_pairs(points: list[tuple[int, int]]):
    """Yield candidate antipodal hull pairs (rotating calipers)."""
    upper, lower = _hull_chains(points)
    i, j = 0, len(lower) - 1
    while i < len(upper) - 1 or j > 0:
        yield upper[i], lower[j]
        if i == len(upper) - 1:
            j -= 1
        elif j == 0:
            i += 1
        # compare slopes of the next hull edges without dividing
        elif (upper[i + 1][1] - upper[i][1]) * (lower[j][0] - lower[j - 1][0]) > (
            lower[j][1] - lower[j - 1][1]
        ) * (upper[i + 1][0] - upper[i][0]):
            i += 1
        else:
            j -= 1


def diameter(margin: np.ndarray) -> float:
    """Longest Euclidean distance between any two margin pixel centers.

    Convex hull + rotating calipers; exact integer comparisons, so the result
    matches the O(n^2) pairwise scan bit for bit.
    """
    pts = _margin_points(margin)
    if len(pts) == 0:
        raise ValueError("no boundary: margin mask is empty")
    if len(pts) == 1:
        return 0.0
    points = sorted(map(tuple, pts.tolist()))
    best = max(
        (p[0] - q[0]) ** 2 + (p[1] - q[1]) ** 2 for p, q in _antipodal_pairs(points)
    )
    return math.sqrt(best)


def physiological_length(t: TerminalPair) -> float:
    """Euclidean distance between the two main-vein terminals."""
    return math.hypot(t.b.x - t.a.x, t.b.y - t.a.y)


def physiological_width(margin: np.ndarray, t: TerminalPair) -> float:
    """Longest leaf extent measured perpendicular to the main-vein axis.

    Margin points are rotated into the terminal-axis frame and grouped into
    unit-width bins along the axis; the widest per-bin spread of the
    perpendicular coordinate wins.
    """
    pts = _margin_points(margin)
    if len(pts) == 0:
        raise ValueError("no boundary: margin mask is empty")
    # canonical terminal order so (a, b) and (b, a) bin identically
    first, second = sorted([tuple(t.a), tuple(t.b)])
    vx = second[0] - first[0]
    vy = second[1] - first[1]
    norm = math.hypot(vx, vy)
    ux, uy = vx / norm, vy / norm
    rel_x = pts[:, 0] - first[0]
    rel_y = pts[:, 1] - first[1]
    along = rel_x * ux + rel_y * uy
    across = rel_x * (-uy) + rel_y * ux
    bins = np.floor(along).astype(np.int64)
    uniq, inverse, counts = np.unique(bins, return_inverse=True, return_counts=True)
    if not (counts >= 2).any():
        raise ValueError("degenerate silhouette: no axis bin holds two margin points")
    hi = np.full(len(uniq), -np.inf)
    lo = np.full(len(uniq), np.inf)
    np.maximum.at(hi, inverse, across)
    np.minimum.at(lo, inverse, across)
    spreads = (hi - lo)[counts >= 2]
    return float(spreads.max())


def area(mask: np.ndarray) -> int:
    """Leaf area: the count of 1-pixels in the (smoothed) leaf mask."""
    return int(np.count_nonzero(mask))


def perimeter(margin: np.ndarray) -> int:
    """Leaf perimeter: the count of 1-pixels in the margin mask."""
    return int(np.count_nonzero(margin))


def basic_features(mask: np.ndarray, margin: np.ndarray, t: TerminalPair) -> BasicFeatures:
    """Bundle the five base measurements of one leaf."""
    return BasicFeatures(
        diameter=diameter(margin),
        phys_length=physiological_length(t),
        phys_width=physiological_width(margin, t),
        area=area(mask),
        perimeter=perimeter(margin),
    )
