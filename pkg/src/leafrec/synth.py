"""Procedural leaf images: superellipse silhouettes with parameterized vein
texture, for demos and the end-to-end benchmark."""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import raster
from .geometry import PixelPoint, TerminalPair


@dataclass(frozen=True)
class LeafSpec:
    name: str
    aspect: float          # half-width over half-length
    exponent: float        # superellipse exponent
    lateral_spacing: float  # spacing of lateral veins along the main axis, px
    lateral_angle: float   # lateral vein angle from the main axis, radians
    main_vein_width: float
    lamina_gray: int
    vein_gray: int


SPECIES = (
    LeafSpec("roundleaf", 0.95, 2.0, 26.0, math.radians(55), 1.2, 120, 200),
    LeafSpec("lanceleaf", 0.34, 1.8, 9.0, math.radians(40), 1.2, 110, 190),
    LeafSpec("broadleaf", 0.72, 3.4, 14.0, math.radians(65), 2.2, 135, 205),
    LeafSpec("needleleaf", 0.16, 2.2, 18.0, math.radians(30), 1.0, 100, 185),
    LeafSpec("diamondleaf", 0.55, 1.0, 11.0, math.radians(50), 3.0, 128, 210),
)


def render_leaf(
    spec: LeafSpec, rng: np.random.Generator, size: int = 192
) -> tuple[np.ndarray, TerminalPair]:
    """Render one leaf as an RGB image plus its main-vein terminals."""
    half_len = size * 0.36 * rng.uniform(0.85, 1.0)
    half_wid = half_len * spec.aspect * rng.uniform(0.9, 1.1)
    theta = rng.uniform(0.0, math.pi)
    cx = size / 2 + rng.uniform(-3, 3)
    cy = size / 2 + rng.uniform(-3, 3)

    yy, xx = np.mgrid[0:size, 0:size].astype(np.float64)
    cos_t, sin_t = math.cos(theta), math.sin(theta)
    u = (xx - cx) * cos_t + (yy - cy) * sin_t
    v = -(xx - cx) * sin_t + (yy - cy) * cos_t

    n = spec.exponent
    inside = (np.abs(u / half_len) ** n + np.abs(v / half_wid) ** n) <= 1.0

    gray = np.full((size, size), 255.0)
    noise = rng.normal(0.0, 4.0, size=(size, size))
    gray[inside] = spec.lamina_gray + noise[inside]

    vein_len = half_len * 0.96
    main = inside & (np.abs(v) <= spec.main_vein_width / 2) & (np.abs(u) <= vein_len)
    gray[main] = spec.vein_gray

    # lateral veins: parallel lines rooted along the main axis at fixed spacing
    tan_a = math.tan(spec.lateral_angle)
    root = u - np.abs(v) / tan_a
    offset = np.mod(root + half_len, spec.lateral_spacing)
    perp = np.minimum(offset, spec.lateral_spacing - offset) * math.sin(spec.lateral_angle)
    lateral = inside & (perp <= 0.7) & (np.abs(v) > spec.main_vein_width / 2)
    gray[lateral] = spec.vein_gray - 12

    gray = np.clip(gray, 0, 255)
    rgb = np.stack(
        [
            np.clip(gray - 10 * inside, 0, 255),
            np.clip(gray + 10 * inside, 0, 255),
            np.clip(gray - 24 * inside, 0, 255),
        ],
        axis=-1,
    ).astype(np.uint8)

    def to_image(pu: float, pv: float) -> PixelPoint:
        x = cx + pu * cos_t - pv * sin_t
        y = cy + pu * sin_t + pv * cos_t
        return PixelPoint(int(round(x)), int(round(y)))

    a = to_image(-vein_len, 0.0)
    b = to_image(vein_len, 0.0)
    if a == b:
        b = PixelPoint(b.x + 1, b.y)
    return rgb, TerminalPair(a, b)


def generate_dataset(
    out_dir: str | Path,
    train_per_class: int = 30,
    test_per_class: int = 10,
    seed: int = 7,
    size: int = 192,
) -> tuple[Path, Path]:
    """Write leaf images, terminal sidecars and train/test CSV manifests.

    Returns the two manifest paths. Deterministic for a given seed.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    rows: dict[str, list[tuple[str, str, str]]] = {"train": [], "test": []}
    for spec in SPECIES:
        for split, count in (("train", train_per_class), ("test", test_per_class)):
            for idx in range(count):
                stem = f"{spec.name}_{split}_{idx:03d}"
                image_name = f"{stem}.png"
                sidecar_name = f"{image_name}.terminals.json"
                rgb, terminals = render_leaf(spec, rng, size=size)
                raster.write_png(out_dir / image_name, rgb)
                (out_dir / sidecar_name).write_text(
                    json.dumps(terminals.to_dict()), encoding="utf-8"
                )
                rows[split].append((image_name, sidecar_name, spec.name))
    paths = []
    for split in ("train", "test"):
        manifest = out_dir / f"{split}.csv"
        with open(manifest, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["image", "terminals", "label"])
            writer.writerows(rows[split])
        paths.append(manifest)
    return paths[0], paths[1]
