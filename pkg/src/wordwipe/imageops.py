"""Core image representations and pixel-level operations.

Images are numpy float32 arrays in [0, 1], shaped H x W x 3 (RGB) or
H x W x 4 (RGBA text layers, channel 3 = alpha). All functions here are
pure and thread-safe.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import cv2
import numpy as np
from PIL import Image

from .exceptions import AnnotationError, ConfigError, RegionError, ShapeError

# PSNR returned when the squared error is exactly zero; keeps aggregates finite.
PSNR_CAP_DB = 100.0

MIN_SIDE = 8

REGION_KINDS = ("target", "nontarget", "background")


@dataclass(frozen=True)
class PadBox:
    """Placement of the resized content inside a square padded canvas."""

    offset_x: int
    offset_y: int
    content_w: int
    content_h: int

    def content_mask(self, canvas: int) -> np.ndarray:
        """Boolean H x W mask of the non-padding area."""
        m = np.zeros((canvas, canvas), dtype=bool)
        m[self.offset_y:self.offset_y + self.content_h,
          self.offset_x:self.offset_x + self.content_w] = True
        return m

    def contains_box(self, box: tuple[int, int, int, int]) -> bool:
        x, y, w, h = box
        return (x >= self.offset_x and y >= self.offset_y
                and x + w <= self.offset_x + self.content_w
                and y + h <= self.offset_y + self.content_h)

    def to_dict(self) -> dict:
        return {"offset_x": self.offset_x, "offset_y": self.offset_y,
                "content_w": self.content_w, "content_h": self.content_h}

    @classmethod
    def from_dict(cls, d: dict) -> "PadBox":
        return cls(int(d["offset_x"]), int(d["offset_y"]),
                   int(d["content_w"]), int(d["content_h"]))


def ensure_rgb(img: np.ndarray) -> np.ndarray:
    """Validate an RGB image array and return it as float32."""
    img = np.asarray(img)
    if img.ndim != 3 or img.shape[2] != 3:
        raise ShapeError(f"expected H x W x 3 image, got shape {img.shape}")
    if img.shape[0] < MIN_SIDE or img.shape[1] < MIN_SIDE:
        raise ShapeError(f"image smaller than {MIN_SIDE} px: {img.shape}")
    return img.astype(np.float32, copy=False)


def ensure_rgba(layer: np.ndarray) -> np.ndarray:
    """Validate an RGBA text-layer array and return it as float32."""
    layer = np.asarray(layer)
    if layer.ndim != 3 or layer.shape[2] != 4:
        raise ShapeError(f"expected H x W x 4 layer, got shape {layer.shape}")
    return layer.astype(np.float32, copy=False)


def resize_with_padding(img: np.ndarray, side: int) -> tuple[np.ndarray, PadBox]:
    """Scale the longest side to `side` (bilinear) and center on a black canvas.

    `side` must be divisible by 16 so downstream networks can downsample.
    Returns the padded image and the PadBox recording content placement.
    """
    if side % 16 != 0:
        raise ConfigError(f"canvas side must be divisible by 16, got {side}")
    img = ensure_rgb(img)
    h, w = img.shape[:2]
    if w >= h:
        new_w = side
        new_h = max(1, round(h * side / w))
    else:
        new_h = side
        new_w = max(1, round(w * side / h))
    if (new_w, new_h) == (w, h):
        content = img.copy()
    else:
        content = cv2.resize(img, (new_w, new_h), interpolation=cv2.INTER_LINEAR)
    content = np.clip(content, 0.0, 1.0)
    off_x = (side - new_w) // 2
    off_y = (side - new_h) // 2
    canvas = np.zeros((side, side, 3), dtype=np.float32)
    canvas[off_y:off_y + new_h, off_x:off_x + new_w] = content
    return canvas, PadBox(off_x, off_y, new_w, new_h)


def alpha_composite(bg: np.ndarray, layer: np.ndarray) -> np.ndarray:
    """Composite an RGBA layer over an RGB background.

    out = alpha * layer.RGB + (1 - alpha) * bg, per pixel and channel.
    For binary alpha this is bit-exact: alpha 0 reproduces bg, alpha 1
    reproduces the layer color.
    """
    bg = ensure_rgb(bg)
    layer = ensure_rgba(layer)
    if bg.shape[:2] != layer.shape[:2]:
        raise ShapeError(f"background {bg.shape[:2]} vs layer {layer.shape[:2]}")
    alpha = layer[:, :, 3:4]
    return alpha * layer[:, :, :3] + (1.0 - alpha) * bg


def mse(a: np.ndarray, b: np.ndarray, mask: np.ndarray | None = None) -> float:
    """Mean squared difference over masked pixels x channels (all if no mask)."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ShapeError(f"shape mismatch: {a.shape} vs {b.shape}")
    sq = (a - b) ** 2
    if mask is None:
        return float(sq.mean())
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != a.shape[:2]:
        raise ShapeError(f"mask shape {mask.shape} does not match image {a.shape[:2]}")
    if not mask.any():
        raise RegionError("mse over an empty mask is undefined")
    return float(sq[mask].mean())


def psnr(a: np.ndarray, b: np.ndarray, mask: np.ndarray | None = None) -> float:
    """PSNR in dB with peak signal 1.0; returns the 100 dB cap when mse is 0."""
    err = mse(a, b, mask)
    if err == 0.0:
        return PSNR_CAP_DB
    return 10.0 * math.log10(1.0 / err)


def region_masks(placements, pad: PadBox, canvas: int) -> dict[str, np.ndarray]:
    """Partition the non-padding area into target / nontarget / background masks.

    `placements` is an iterable of objects with `.box` (x, y, w, h) and
    `.is_target` attributes. Pixels covered by both a target and a
    non-target box are assigned to the target mask. The three masks are
    pairwise disjoint and their union is exactly the PadBox content.
    """
    target = np.zeros((canvas, canvas), dtype=bool)
    others = np.zeros((canvas, canvas), dtype=bool)
    for p in placements:
        x, y, w, h = p.box
        if not pad.contains_box((x, y, w, h)):
            raise AnnotationError(f"word box {p.box} outside content area {pad}")
        if p.is_target:
            target[y:y + h, x:x + w] = True
        else:
            others[y:y + h, x:x + w] = True
    content = pad.content_mask(canvas)
    nontarget = others & ~target
    background = content & ~target & ~others
    return {"target": target, "nontarget": nontarget, "background": background}


def quantize_8bit(img: np.ndarray) -> np.ndarray:
    """Float image as it will read back after an 8-bit save/load round trip."""
    data = np.rint(np.clip(img, 0.0, 1.0) * 255.0).astype(np.uint8)
    return data.astype(np.float32) / 255.0


def save_image(path: str | Path, img: np.ndarray) -> None:
    """Write an RGB or RGBA float image as an 8-bit PNG."""
    img = np.asarray(img)
    if img.ndim != 3 or img.shape[2] not in (3, 4):
        raise ShapeError(f"expected H x W x 3/4 image, got shape {img.shape}")
    data = np.rint(np.clip(img, 0.0, 1.0) * 255.0).astype(np.uint8)
    mode = "RGB" if img.shape[2] == 3 else "RGBA"
    Image.fromarray(data, mode).save(str(path), format="PNG")


def load_image(path: str | Path) -> np.ndarray:
    """Read a PNG into a float32 array in [0, 1]; alpha preserved if present."""
    try:
        with Image.open(str(path)) as im:
            if im.mode in ("RGBA", "LA", "PA"):
                im = im.convert("RGBA")
            else:
                im = im.convert("RGB")
            data = np.asarray(im)
    except (OSError, ValueError) as exc:
        raise IOError(f"cannot read image {path}: {exc}") from exc
    return (data.astype(np.float32) / 255.0)
