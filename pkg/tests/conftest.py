from __future__ import annotations

import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from leafrec import raster
from leafrec.geometry import PixelPoint, TerminalPair


def make_rect_mask(width: int, height: int, pad: int = 4) -> np.ndarray:
    """Filled width x height rectangle of 1s inside a 0 field."""
    mask = np.zeros((height + 2 * pad, width + 2 * pad), dtype=np.uint8)
    mask[pad : pad + height, pad : pad + width] = 1
    return mask


def make_disk_mask(radius: int, pad: int = 4) -> np.ndarray:
    size = 2 * radius + 1 + 2 * pad
    c = radius + pad
    yy, xx = np.mgrid[0:size, 0:size]
    return (((xx - c) ** 2 + (yy - c) ** 2) <= radius * radius).astype(np.uint8)


def leaf_gray_with_vein(mask: np.ndarray, lamina: int = 120, vein: int = 200) -> np.ndarray:
    """Grayscale leaf: flat lamina with one bright 1-px vein row through the
    mask centroid, white background."""
    gray = np.full(mask.shape, 255, dtype=np.uint8)
    gray[mask == 1] = lamina
    ys, xs = np.nonzero(mask)
    row = int(np.round(ys.mean()))
    inside = xs[ys == row]
    if inside.size > 2:
        gray[row, inside.min() + 2 : inside.max() - 1] = vein
    return gray


def midline_terminals(mask: np.ndarray) -> TerminalPair:
    ys, xs = np.nonzero(mask)
    row = int(np.round(ys.mean()))
    inside = np.sort(xs[ys == row])
    return TerminalPair(PixelPoint(int(inside[0]), row), PixelPoint(int(inside[-1]), row))


@pytest.fixture
def rect_mask() -> np.ndarray:
    return make_rect_mask(20, 12)


@pytest.fixture
def disk_mask() -> np.ndarray:
    return make_disk_mask(40)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240817)
