"""Pixel-level operations: grayscale conversion, thresholding, smoothing,
margin extraction and grayscale morphological opening."""
from __future__ import annotations

from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from PIL import Image
from scipy import ndimage
from scipy.signal import find_peaks

GRAY_WEIGHTS = (0.2989, 0.5870, 0.1140)
LAPLACIAN_KERNEL = np.array([[0, 1, 0], [1, -4, 1], [0, 1, 0]], dtype=np.int64)


class StructuringElement:
    """Flat disk-shaped structuring element: all integer offsets with
    dx^2 + dy^2 <= radius^2."""

    def __init__(self, radius: int):
        if not isinstance(radius, (int, np.integer)) or radius < 1:
            raise ValueError(f"structuring element radius must be a positive integer, got {radius!r}")
        self.radius = int(radius)
        ax = np.arange(-self.radius, self.radius + 1)
        dx, dy = np.meshgrid(ax, ax)
        self.footprint = (dx * dx + dy * dy) <= self.radius * self.radius
        self.footprint.setflags(write=False)

    @property
    def offsets(self) -> frozenset[tuple[int, int]]:
        ys, xs = np.nonzero(self.footprint)
        return frozenset(zip((xs - self.radius).tolist(), (ys - self.radius).tolist()))

    def __repr__(self) -> str:
        return f"StructuringElement(radius={self.radius})"


def _require_image(arr: np.ndarray, ndim: int, name: str) -> np.ndarray:
    arr = np.asarray(arr)
    if arr.ndim != ndim:
        raise ValueError(f"{name} must be a {ndim}-d array, got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"{name} must have positive dimensions, got shape {arr.shape}")
    return arr


def _require_mask(mask: np.ndarray, name: str = "mask") -> np.ndarray:
    mask = _require_image(mask, 2, name)
    values = np.unique(mask)
    if not np.isin(values, (0, 1)).all():
        raise ValueError(f"{name} may only contain 0 and 1")
    return mask.astype(np.uint8, copy=False)


def load_rgb(path: str | Path) -> np.ndarray:
    """Decode a JPEG/PNG file into an (H, W, 3) uint8 array."""
    with Image.open(path) as img:
        return np.asarray(img.convert("RGB"), dtype=np.uint8)


def write_png(path: str | Path, image: np.ndarray) -> None:
    """Write a 2-d grayscale or (H, W, 3) RGB uint8 array as PNG."""
    Image.fromarray(np.asarray(image, dtype=np.uint8)).save(path, format="PNG")


def to_grayscale(img: np.ndarray) -> np.ndarray:
    """Convert an (H, W, 3) RGB image to uint8 luminance.

    Weighted channel sum, rounded half away from zero and clamped to [0, 255].
    """
    img = _require_image(img, 3, "rgb image")
    if img.shape[2] != 3:
        raise ValueError(f"rgb image must have 3 channels, got {img.shape[2]}")
    wr, wg, wb = GRAY_WEIGHTS
    gray = wr * img[..., 0] + wg * img[..., 1] + wb * img[..., 2]
    return np.clip(np.floor(gray + 0.5), 0, 255).astype(np.uint8)


def suggest_threshold(histograms: Sequence[np.ndarray] | Iterable[np.ndarray]) -> float:
    """Pick a binarization level from per-channel mean histograms.

    Averages the channel histograms, locates the two highest local maxima and
    returns valley/255 for the lowest bin strictly between them (leftmost on
    ties). Raises ValueError when no bimodal structure exists.
    """
    hists = [np.asarray(h, dtype=np.float64) for h in histograms]
    if not hists:
        raise ValueError("at least one channel histogram is required")
    for h in hists:
        if h.shape != (256,):
            raise ValueError(f"histograms must have 256 bins, got shape {h.shape}")
    mean_hist = np.mean(hists, axis=0)
    peaks, _ = find_peaks(mean_hist)
    if len(peaks) < 2:
        raise ValueError("no bimodal structure: fewer than two local maxima")
    top_two = sorted(sorted(peaks, key=lambda p: (-mean_hist[p], p))[:2])
    lo, hi = top_two
    valley = lo + 1 + int(np.argmin(mean_hist[lo + 1 : hi]))
    return valley / 255.0


def binarize(gray: np.ndarray, level: float = 0.95) -> np.ndarray:
    """Threshold a grayscale image into a 0/1 mask with 1 = leaf tissue.

    A pixel is leaf iff its normalized luminance is <= level; the white
    background ends up 0.
    """
    gray = _require_image(gray, 2, "gray image")
    if not 0.0 < level < 1.0:
        raise ValueError(f"level must lie in (0, 1), got {level}")
    return (gray / 255.0 <= level).astype(np.uint8)


def smooth_mask(mask: np.ndarray, k: int = 3) -> np.ndarray:
    """Apply a k x k averaging filter to a 0/1 mask and re-round to 0/1.

    Replicate padding at the borders; even k anchors the extra row/column
    above-left; means of exactly 0.5 round up. Integer arithmetic throughout,
    so results are bit-exact.
    """
    mask = _require_mask(mask)
    if k < 2:
        raise ValueError(f"kernel side must be >= 2, got {k}")
    before = k // 2
    after = k - 1 - before
    padded = np.pad(mask, ((before, after), (before, after)), mode="edge").astype(np.int64)
    integral = np.zeros((padded.shape[0] + 1, padded.shape[1] + 1), dtype=np.int64)
    integral[1:, 1:] = padded.cumsum(axis=0).cumsum(axis=1)
    h, w = mask.shape
    window = (
        integral[k : k + h, k : k + w]
        - integral[:h, k : k + w]
        - integral[k : k + h, :w]
        + integral[:h, :w]
    )
    return (2 * window >= k * k).astype(np.uint8)


def extract_margin(mask: np.ndarray) -> np.ndarray:
    """Extract the leaf boundary as a 0/1 mask.

    A pixel is margin iff it is leaf and the Laplacian response (zero padding)
    is nonzero, so flat regions drop out and only the boundary survives.
    """
    mask = _require_mask(mask)
    response = ndimage.convolve(mask.astype(np.int64), LAPLACIAN_KERNEL, mode="constant", cval=0)
    return ((response != 0) & (mask == 1)).astype(np.uint8)


def gray_opening(gray: np.ndarray, se: StructuringElement) -> np.ndarray:
    """Flat grayscale opening (erosion then dilation, replicate padding)."""
    gray = _require_image(gray, 2, "gray image")
    return ndimage.grey_opening(gray, footprint=se.footprint, mode="nearest")
