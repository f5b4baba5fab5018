"""The 12 digital morphological features assembled from basic measurements
and grayscale vein residues."""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import geometry, raster
from .geometry import TerminalPair

FEATURE_NAMES = (
    "smooth_factor",
    "aspect_ratio",
    "form_factor",
    "rectangularity",
    "narrow_factor",
    "perim_ratio_diameter",
    "perim_ratio_lw",
    "v1",
    "v2",
    "v3",
    "v4",
    "v4_over_v1",
)

DEFAULT_TAU = 10 / 255
VEIN_RADII = (1, 2, 3, 4)


class ExtractionError(ValueError):
    """Feature extraction failed; carries the name of the offending feature."""

    def __init__(self, feature: str, message: str):
        self.feature = feature
        super().__init__(f"{feature}: {message}")


@dataclass(frozen=True)
class VeinAreas:
    """Thresholded opening-residue pixel counts for disk radii 1..4."""

    a_v1: int
    a_v2: int
    a_v3: int
    a_v4: int

    def __post_init__(self):
        counts = (self.a_v1, self.a_v2, self.a_v3, self.a_v4)
        if any(c < 0 for c in counts) or any(a > b for a, b in zip(counts, counts[1:])):
            raise ExtractionError("vein_areas", f"residue counts not nondecreasing: {counts}")

    def as_tuple(self) -> tuple[int, int, int, int]:
        return (self.a_v1, self.a_v2, self.a_v3, self.a_v4)


def smooth_factor(mask: np.ndarray, kernels: tuple[int, int] = (5, 2)) -> float:
    """Area ratio of the mask smoothed with the coarse vs. the fine filter."""
    coarse, fine = kernels
    denom = geometry.area(raster.smooth_mask(mask, fine))
    if denom == 0:
        raise ExtractionError("smooth_factor", "degenerate leaf: fine smoothing leaves no pixels")
    return geometry.area(raster.smooth_mask(mask, coarse)) / denom


def vein_areas(
    gray: np.ndarray,
    mask: np.ndarray,
    margin: np.ndarray,
    tau: float = DEFAULT_TAU,
) -> VeinAreas:
    """Count vein-scale pixels: opening residue above tau, inside the leaf,
    off the margin, for disk radii 1..4."""
    if not 0.0 < tau < 1.0:
        raise ValueError(f"tau must lie in (0, 1), got {tau}")
    gray = np.asarray(gray)
    if gray.shape != np.asarray(mask).shape or gray.shape != np.asarray(margin).shape:
        raise ValueError("gray, mask and margin must share dimensions")
    keep = (np.asarray(mask) == 1) & (np.asarray(margin) == 0)
    signed = gray.astype(np.int64)
    counts = []
    for r in VEIN_RADII:
        residue = signed - raster.gray_opening(gray, raster.StructuringElement(r)).astype(np.int64)
        counts.append(int(np.count_nonzero((residue / 255.0 > tau) & keep)))
    return VeinAreas(*counts)


def extract_features(
    gray: np.ndarray,
    mask: np.ndarray,
    margin: np.ndarray,
    terminals: TerminalPair,
    tau: float = DEFAULT_TAU,
    smooth_factor_kernels: tuple[int, int] = (5, 2),
) -> np.ndarray:
    """Compute the 12 morphological features, in FEATURE_NAMES order.

    The mask is expected to be the smoothed leaf mask and the margin its
    extracted boundary. Any zero denominator raises ExtractionError naming
    the feature it breaks.
    """
    sf = smooth_factor(mask, smooth_factor_kernels)

    a = geometry.area(mask)
    p = geometry.perimeter(margin)
    if p == 0:
        raise ExtractionError("form_factor", "leaf margin is empty")
    d = geometry.diameter(margin)
    lp = geometry.physiological_length(terminals)
    try:
        wp = geometry.physiological_width(margin, terminals)
    except ValueError as exc:
        raise ExtractionError("aspect_ratio", str(exc)) from exc

    if wp == 0:
        raise ExtractionError("aspect_ratio", "physiological width is zero")
    if a == 0:
        raise ExtractionError("rectangularity", "leaf area is zero")
    if d == 0:
        raise ExtractionError("perim_ratio_diameter", "diameter is zero")

    veins = vein_areas(gray, mask, margin, tau)
    v1, v2, v3, v4 = (c / a for c in veins.as_tuple())
    if veins.a_v1 == 0:
        raise ExtractionError("v4_over_v1", "degenerate vein ratio: no radius-1 residue")

    values = np.array(
        [
            sf,
            lp / wp,
            4.0 * math.pi * a / (p * p),
            lp * wp / a,
            d / lp,
            p / d,
            p / (lp + wp),
            v1,
            v2,
            v3,
            v4,
            veins.a_v4 / veins.a_v1,
        ],
        dtype=np.float64,
    )
    if not np.isfinite(values).all():
        bad = FEATURE_NAMES[int(np.flatnonzero(~np.isfinite(values))[0])]
        raise ExtractionError(bad, "non-finite value")
    return values


def feature_record(image_id: str, values: np.ndarray, class_label: str | None = None) -> dict:
    """JSON-ready record for one extracted feature vector."""
    record: dict = {"image_id": image_id, "features": [float(v) for v in values]}
    if class_label is not None:
        record["class_label"] = class_label
    return record


def write_record(path: str | Path, record: dict) -> None:
    Path(path).write_text(json.dumps(record, indent=2) + "\n", encoding="utf-8")


def write_feature_csv(path: str | Path, vectors: Iterable[Sequence[float]]) -> None:
    """Write feature vectors as CSV with the fixed 12-column header."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(FEATURE_NAMES)
        for vec in vectors:
            if len(vec) != len(FEATURE_NAMES):
                raise ValueError(f"expected {len(FEATURE_NAMES)} features, got {len(vec)}")
            writer.writerow([repr(float(v)) for v in vec])
