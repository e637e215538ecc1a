"""Bundled font set and font resolution.

Six DejaVu faces ship with the package (see fonts/LICENSE_DEJAVU). A font id
is either the stem of a bundled file ("DejaVuSans") or a path to a .ttf/.otf
file supplied by the user.
"""

from __future__ import annotations

import functools
from pathlib import Path

from PIL import ImageFont

from .exceptions import AssetError

FONT_DIR = Path(__file__).parent / "fonts"


def bundled_font_ids() -> tuple[str, ...]:
    """Stems of the fonts shipped with the package, sorted."""
    return tuple(sorted(p.stem for p in FONT_DIR.glob("*.ttf")))


def resolve_font(font_id: str) -> Path:
    """Map a font id or path to an existing font file."""
    bundled = FONT_DIR / f"{font_id}.ttf"
    if bundled.is_file():
        return bundled
    p = Path(font_id)
    if p.is_file():
        return p
    raise AssetError(f"font not found: {font_id!r} "
                     f"(bundled ids: {', '.join(bundled_font_ids())})")


@functools.lru_cache(maxsize=256)
def load_font(font_id: str, size: int) -> ImageFont.FreeTypeFont:
    path = resolve_font(font_id)
    try:
        return ImageFont.truetype(str(path), size=size)
    except OSError as exc:
        raise AssetError(f"cannot load font {path}: {exc}") from exc
