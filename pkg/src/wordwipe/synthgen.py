"""Synthetic scene-text sample generation.

Each scene sample is a five-image ground-truth tuple: a text-free
background, the text-overlaid image, the rendered text layer (RGBA), the
layer with every instance of the target word erased, and the ideal output
(background composited with the stripped layer). Word boxes never overlap,
so stripping a word is an exact re-render of the remaining placements and
all compositing identities hold bit-exact in float.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field, replace

import numpy as np
from PIL import Image, ImageDraw

from . import fonts, imageops
from .exceptions import GenerationError, ShapeError
from .imageops import PadBox

ALPHA_THRESHOLD = 0.5


@dataclass(frozen=True)
class Vocabulary:
    """The K removable candidate words plus the never-removed distractors."""

    candidates: tuple[str, ...]
    distractors: tuple[str, ...] = ()

    def __post_init__(self):
        if len(self.candidates) < 1:
            raise GenerationError("vocabulary needs at least one candidate word")
        if len(set(self.candidates)) != len(self.candidates):
            raise GenerationError("candidate words must be pairwise distinct")
        if set(self.candidates) & set(self.distractors):
            raise GenerationError("candidates and distractors must be disjoint")

    @property
    def k(self) -> int:
        return len(self.candidates)

    def condition_index(self, word: str) -> int:
        try:
            return self.candidates.index(word)
        except ValueError:
            raise GenerationError(f"{word!r} is not a candidate word") from None

    def to_dict(self) -> dict:
        return {"candidates": list(self.candidates),
                "distractors": list(self.distractors)}

    @classmethod
    def from_dict(cls, d: dict) -> "Vocabulary":
        return cls(tuple(d["candidates"]), tuple(d.get("distractors", ())))


def one_hot(index: int, k: int) -> np.ndarray:
    """K-dimensional one-hot condition vector selecting candidate `index`."""
    if not 0 <= index < k:
        raise GenerationError(f"condition index {index} out of range for K={k}")
    vec = np.zeros(k, dtype=np.float32)
    vec[index] = 1.0
    return vec


def validate_condition(vec: np.ndarray) -> int:
    """Check one-hot structure; returns the hot index."""
    vec = np.asarray(vec)
    if vec.ndim != 1 or not np.all((vec == 0) | (vec == 1)) or vec.sum() != 1:
        raise GenerationError(f"condition vector is not one-hot: {vec}")
    return int(np.argmax(vec))


@dataclass(frozen=True)
class GenConfig:
    """Knobs for layout sampling and rendering."""

    side: int = 128
    n_candidates: tuple[int, int] = (1, 3)      # per-image candidate words
    n_distractors: tuple[int, int] = (1, 4)
    font_size: tuple[int, int] = (14, 32)       # pixel sizes before rotation
    rotation_max_deg: float = 12.0
    font_ids: tuple[str, ...] = field(default_factory=fonts.bundled_font_ids)
    max_tries: int = 40                         # rejection attempts per word
    p_present: float = 0.8                      # target drawn from placed candidates
    min_color_dist: float = 0.1                 # vs local background mean, L2

    def __post_init__(self):
        if self.n_candidates[1] > 3:
            raise GenerationError("at most 3 candidate words per image")
        if self.n_candidates[0] < 1:
            raise GenerationError("at least 1 candidate word per image")
        if not self.font_ids:
            raise GenerationError("font set is empty")


@dataclass(frozen=True)
class WordPlacement:
    """One rendered word: geometry, style, and candidate/target flags.

    The box (x, y, w, h) is the bounding box of the rotated raster on the
    padded canvas; every nonzero-alpha pixel of the word lies inside it.
    """

    word: str
    box: tuple[int, int, int, int]
    font_id: str
    font_size: int
    color: tuple[float, float, float]
    rotation_deg: float
    is_candidate: bool
    is_target: bool = False

    def to_dict(self) -> dict:
        return {"word": self.word, "box": list(self.box), "font_id": self.font_id,
                "font_size": self.font_size, "color": list(self.color),
                "rotation_deg": self.rotation_deg,
                "is_candidate": self.is_candidate, "is_target": self.is_target}

    @classmethod
    def from_dict(cls, d: dict) -> "WordPlacement":
        return cls(word=d["word"], box=tuple(int(v) for v in d["box"]),
                   font_id=d["font_id"], font_size=int(d["font_size"]),
                   color=tuple(float(v) for v in d["color"]),
                   rotation_deg=float(d["rotation_deg"]),
                   is_candidate=bool(d["is_candidate"]),
                   is_target=bool(d["is_target"]))


@dataclass
class SceneSample:
    """The five-image ground-truth tuple plus annotations."""

    background: np.ndarray           # padded, H x W x 3
    overlaid: np.ndarray             # H x W x 3
    text_layer: np.ndarray           # H x W x 4, binary alpha
    text_layer_stripped: np.ndarray  # H x W x 4
    ideal: np.ndarray                # H x W x 3
    placements: list[WordPlacement]
    target_word: str | None
    condition: np.ndarray            # K one-hot
    pad: PadBox
    background_id: str | None = None


@dataclass
class TextOnlySample:
    """Layer pair for pretraining the word-removal stage; no background."""

    text_layer: np.ndarray
    text_layer_stripped: np.ndarray
    placements: list[WordPlacement]
    target_word: str | None
    condition: np.ndarray
    pad: PadBox


def _as_rng(rng_seed) -> np.random.Generator:
    if isinstance(rng_seed, np.random.Generator):
        return rng_seed
    return np.random.default_rng(rng_seed)


def sample_rng(master_seed: int, sample_index: int) -> np.random.Generator:
    """Independent per-sample RNG stream derived from the master seed."""
    return np.random.default_rng(np.random.SeedSequence([master_seed, sample_index]))


@functools.lru_cache(maxsize=8192)
def _word_mask(word: str, font_id: str, font_size: int,
               rotation_deg: float) -> np.ndarray:
    """Binary ink mask of one rotated word, cropped tight. None if blank.

    The antialiased raster is thresholded at 0.5, which makes the mask (and
    therefore every compositing identity downstream) exactly reproducible.
    """
    font = fonts.load_font(font_id, font_size)
    x0, y0, x1, y1 = font.getbbox(word)
    w, h = x1 - x0, y1 - y0
    if w <= 0 or h <= 0:
        return None
    margin = 2
    tile = Image.new("L", (w + 2 * margin, h + 2 * margin), 0)
    ImageDraw.Draw(tile).text((margin - x0, margin - y0), word, fill=255, font=font)
    if rotation_deg != 0.0:
        tile = tile.rotate(rotation_deg, resample=Image.BILINEAR,
                           expand=True, fillcolor=0)
    mask = np.asarray(tile, dtype=np.float32) / 255.0 >= ALPHA_THRESHOLD
    ys, xs = np.nonzero(mask)
    if ys.size == 0:
        return None
    mask = mask[ys.min():ys.max() + 1, xs.min():xs.max() + 1].copy()
    mask.flags.writeable = False
    return mask


def _boxes_overlap(a: tuple[int, int, int, int], b: tuple[int, int, int, int]) -> bool:
    ax, ay, aw, ah = a
    bx, by, bw, bh = b
    return ax < bx + bw and bx < ax + aw and ay < by + bh and by < ay + ah


def sample_layout(canvas: int, vocab: Vocabulary, rng_seed, cfg: GenConfig,
                  content: PadBox | None = None) -> list[WordPlacement]:
    """Sample non-overlapping word placements inside the content area.

    Places 1-3 candidate words and a configured number of distractors by
    rejection sampling; a word that cannot be placed within cfg.max_tries
    attempts is dropped. Deterministic for a fixed seed.
    """
    rng = _as_rng(rng_seed)
    if content is None:
        content = PadBox(0, 0, canvas, canvas)
    if content.content_w < cfg.font_size[0] or content.content_h < cfg.font_size[0]:
        raise GenerationError(
            f"content area {content.content_w}x{content.content_h} smaller than "
            f"minimum word size {cfg.font_size[0]}")

    n_cand = int(rng.integers(cfg.n_candidates[0], cfg.n_candidates[1] + 1))
    n_cand = min(n_cand, vocab.k)
    cand_idx = rng.choice(vocab.k, size=n_cand, replace=False)
    words = [(vocab.candidates[i], True) for i in cand_idx]
    n_dist = int(rng.integers(cfg.n_distractors[0], cfg.n_distractors[1] + 1))
    if n_dist > 0 and not vocab.distractors:
        n_dist = 0
    for _ in range(n_dist):
        words.append((vocab.distractors[int(rng.integers(len(vocab.distractors)))], False))

    placements: list[WordPlacement] = []
    for word, is_cand in words:
        for _ in range(cfg.max_tries):
            font_id = cfg.font_ids[int(rng.integers(len(cfg.font_ids)))]
            size = int(rng.integers(cfg.font_size[0], cfg.font_size[1] + 1))
            rot = float(rng.uniform(-cfg.rotation_max_deg, cfg.rotation_max_deg))
            mask = _word_mask(word, font_id, size, rot)
            if mask is None:
                continue
            h, w = mask.shape
            if w > content.content_w or h > content.content_h:
                continue
            x = int(rng.integers(content.offset_x,
                                 content.offset_x + content.content_w - w + 1))
            y = int(rng.integers(content.offset_y,
                                 content.offset_y + content.content_h - h + 1))
            box = (x, y, w, h)
            if any(_boxes_overlap(box, p.box) for p in placements):
                continue
            color = tuple(float(c) for c in rng.uniform(0.0, 1.0, size=3))
            placements.append(WordPlacement(word=word, box=box, font_id=font_id,
                                            font_size=size, color=color,
                                            rotation_deg=rot, is_candidate=is_cand))
            break
        # word dropped when no non-overlapping position was found
    return placements


def render_text_layer(placements: list[WordPlacement],
                      canvas: int | tuple[int, int]) -> np.ndarray:
    """Rasterize placements into an RGBA layer with binary alpha.

    Each word is rendered independently into its box, so rendering any
    subset of non-overlapping placements reproduces those words pixel-exact.
    """
    shape = (canvas, canvas) if isinstance(canvas, int) else tuple(canvas)
    layer = np.zeros((shape[0], shape[1], 4), dtype=np.float32)
    for p in placements:
        mask = _word_mask(p.word, p.font_id, p.font_size, p.rotation_deg)
        x, y, w, h = p.box
        if mask is None or mask.shape != (h, w):
            raise ShapeError(f"placement {p.word!r} box {p.box} does not match "
                             f"its raster")
        region = layer[y:y + h, x:x + w]
        region[mask, 0] = p.color[0]
        region[mask, 1] = p.color[1]
        region[mask, 2] = p.color[2]
        region[mask, 3] = 1.0
    return layer


def strip_words(layer: np.ndarray, placements: list[WordPlacement],
                target_word: str | None) -> np.ndarray:
    """Erase every placement of `target_word`; all other pixels unchanged.

    Implemented as a re-render of the remaining placements, which is exact
    because placements never overlap. Absent target is a no-op (a copy).
    """
    layer = imageops.ensure_rgba(layer)
    kept = [p for p in placements if p.word != target_word]
    if len(kept) == len(placements):
        return layer.copy()
    return render_text_layer(kept, layer.shape[:2])


def _choose_target(placements: list[WordPlacement], vocab: Vocabulary,
                   rng: np.random.Generator, p_present: float) -> str:
    """Draw the conditioned target word from the candidate set.

    With probability `p_present` the target is one of the candidates placed
    in this image; otherwise a candidate absent from it (teaching the no-op
    case). Falls back to the other pool when the chosen one is empty.
    """
    placed = sorted({p.word for p in placements if p.is_candidate},
                    key=vocab.condition_index)
    absent = [wd for wd in vocab.candidates if wd not in placed]
    pool = placed if (rng.uniform() < p_present and placed) else absent
    if not pool:
        pool = placed or absent
    return pool[int(rng.integers(len(pool)))]


def _adjust_colors(placements: list[WordPlacement], background: np.ndarray,
                   rng: np.random.Generator, min_dist: float,
                   max_tries: int = 20) -> list[WordPlacement]:
    """Resample fill colors that sit too close to the local background mean."""
    out = []
    for p in placements:
        x, y, w, h = p.box
        local = background[y:y + h, x:x + w].reshape(-1, 3).mean(axis=0)
        color = np.array(p.color, dtype=np.float64)
        for _ in range(max_tries):
            if np.linalg.norm(color - local) >= min_dist:
                break
            color = rng.uniform(0.0, 1.0, size=3)
        out.append(replace(p, color=tuple(float(c) for c in color)))
    return out


def _mark_target(placements: list[WordPlacement], target_word: str) -> list[WordPlacement]:
    return [replace(p, is_target=(p.word == target_word)) for p in placements]


def make_scene_sample(background: np.ndarray, vocab: Vocabulary, rng_seed,
                      cfg: GenConfig, background_id: str | None = None) -> SceneSample:
    """Generate one full scene sample from a text-free background image."""
    rng = _as_rng(rng_seed)
    padded, pad = imageops.resize_with_padding(background, cfg.side)
    placements = sample_layout(cfg.side, vocab, rng, cfg, content=pad)
    placements = _adjust_colors(placements, padded, rng, cfg.min_color_dist)
    target = _choose_target(placements, vocab, rng, cfg.p_present)
    placements = _mark_target(placements, target)
    layer = render_text_layer(placements, cfg.side)
    stripped = strip_words(layer, placements, target)
    overlaid = imageops.alpha_composite(padded, layer)
    ideal = imageops.alpha_composite(padded, stripped)
    condition = one_hot(vocab.condition_index(target), vocab.k)
    return SceneSample(background=padded, overlaid=overlaid, text_layer=layer,
                       text_layer_stripped=stripped, ideal=ideal,
                       placements=placements, target_word=target,
                       condition=condition, pad=pad, background_id=background_id)


def make_text_only_record(vocab: Vocabulary, rng_seed, cfg: GenConfig) -> TextOnlySample:
    """Generate one text-only layer pair on a transparent canvas."""
    rng = _as_rng(rng_seed)
    pad = PadBox(0, 0, cfg.side, cfg.side)
    placements = sample_layout(cfg.side, vocab, rng, cfg, content=pad)
    target = _choose_target(placements, vocab, rng, cfg.p_present)
    placements = _mark_target(placements, target)
    layer = render_text_layer(placements, cfg.side)
    stripped = strip_words(layer, placements, target)
    condition = one_hot(vocab.condition_index(target), vocab.k)
    return TextOnlySample(text_layer=layer, text_layer_stripped=stripped,
                          placements=placements, target_word=target,
                          condition=condition, pad=pad)


def make_text_only_sample(vocab: Vocabulary, rng_seed, cfg: GenConfig
                          ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(text layer, stripped layer, condition) for removal pretraining."""
    rec = make_text_only_record(vocab, rng_seed, cfg)
    return rec.text_layer, rec.text_layer_stripped, rec.condition
