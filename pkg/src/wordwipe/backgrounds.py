"""Procedural text-free background images.

Smooth low-frequency color fields stand in for a photographic background
corpus at desk scale: they are guaranteed to contain no text, are cheap to
generate, and are deterministic given a seed.
"""

from __future__ import annotations

from pathlib import Path

import cv2
import numpy as np

from . import imageops
from .exceptions import DatasetError

IMAGE_EXTS = (".png", ".jpg", ".jpeg", ".bmp")


def make_background(height: int, width: int, rng: np.random.Generator) -> np.ndarray:
    """One smooth random RGB field in [0, 1]."""
    cells = int(rng.integers(3, 9))
    coarse = rng.uniform(0.0, 1.0, size=(cells, cells, 3)).astype(np.float32)
    img = cv2.resize(coarse, (width, height), interpolation=cv2.INTER_CUBIC)
    # mild linear shading so backgrounds are not piecewise-smooth only
    gx = np.linspace(0, 1, width, dtype=np.float32)[None, :, None]
    gy = np.linspace(0, 1, height, dtype=np.float32)[:, None, None]
    tilt = rng.uniform(-0.25, 0.25, size=(2, 3)).astype(np.float32)
    img = img + gx * tilt[0] + gy * tilt[1]
    return np.clip(img, 0.0, 1.0)


def write_backgrounds(out_dir: str | Path, count: int, size: tuple[int, int],
                      seed: int) -> list[Path]:
    """Generate `count` backgrounds into `out_dir`; returns the file paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for i in range(count):
        rng = np.random.default_rng(np.random.SeedSequence([seed, i]))
        img = make_background(size[0], size[1], rng)
        p = out / f"bg_{i:05d}.png"
        imageops.save_image(p, img)
        paths.append(p)
    return paths


def list_backgrounds(bg_dir: str | Path) -> list[Path]:
    """Sorted background image paths under `bg_dir`."""
    d = Path(bg_dir)
    if not d.is_dir():
        raise DatasetError(f"background directory does not exist: {d}")
    paths = sorted(p for p in d.iterdir() if p.suffix.lower() in IMAGE_EXTS)
    if not paths:
        raise DatasetError(f"no background images in {d}")
    return paths
