"""Dataset serialization: write/read sample tuples and generate full sets.

On-disk layout::

    root/meta.json
    root/samples/<id>/{bg.png, overlaid.png, text.png, text_stripped.png,
                       ideal.png, ann.json}

Text-only sets keep only text.png, text_stripped.png and ann.json. Images
are 8-bit PNGs; annotations round-trip exactly, images within 1/255 per
channel. Binary alpha and the compositing identities survive quantization
bit-exact, which `validate_dataset` exploits.
"""

from __future__ import annotations

import itertools
import json
from pathlib import Path
from typing import Iterable, Iterator

import numpy as np

from . import imageops, synthgen
from .exceptions import DatasetError
from .imageops import PadBox
from .synthgen import (GenConfig, SceneSample, TextOnlySample, Vocabulary,
                       WordPlacement, one_hot, sample_rng)

SCHEMA_VERSION = 1

SCENE_FILES = ("bg.png", "overlaid.png", "text.png", "text_stripped.png",
               "ideal.png", "ann.json")
TEXT_ONLY_FILES = ("text.png", "text_stripped.png", "ann.json")


def _dump_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _load_json(path: Path):
    if not path.is_file():
        raise DatasetError(f"missing file: {path}")
    try:
        return json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise DatasetError(f"corrupt JSON in {path}: {exc}") from exc


def _ann_dict(placements, target_word, condition_index, pad, background_id):
    return {
        "placements": [p.to_dict() for p in placements],
        "target_word": target_word,
        "condition_index": condition_index,
        "pad": pad.to_dict(),
        "background_id": background_id,
    }


def write_dataset(samples: Iterable[SceneSample | TextOnlySample],
                  root: str | Path, vocab: Vocabulary, side: int,
                  seed: int) -> int:
    """Write samples under `root`; returns the number written."""
    root = Path(root)
    samples = iter(samples)
    try:
        first = next(samples)
    except StopIteration:
        raise DatasetError("cannot write an empty dataset") from None
    kind = "scene" if isinstance(first, SceneSample) else "text_only"
    (root / "samples").mkdir(parents=True, exist_ok=True)
    count = 0
    for sample in itertools.chain([first], samples):
        sdir = root / "samples" / f"{count:06d}"
        sdir.mkdir(parents=True, exist_ok=True)
        if isinstance(sample, SceneSample):
            imageops.save_image(sdir / "bg.png", sample.background)
            imageops.save_image(sdir / "overlaid.png", sample.overlaid)
            imageops.save_image(sdir / "ideal.png", sample.ideal)
            background_id = sample.background_id
        else:
            background_id = None
        imageops.save_image(sdir / "text.png", sample.text_layer)
        imageops.save_image(sdir / "text_stripped.png", sample.text_layer_stripped)
        cond_index = int(np.argmax(sample.condition))
        _dump_json(sdir / "ann.json",
                   _ann_dict(sample.placements, sample.target_word,
                             cond_index, sample.pad, background_id))
        count += 1
    meta = {
        "schema_version": SCHEMA_VERSION,
        "kind": kind,
        "k": vocab.k,
        "candidates": list(vocab.candidates),
        "distractors": list(vocab.distractors),
        "side": side,
        "seed": seed,
        "count": count,
    }
    _dump_json(root / "meta.json", meta)
    return count


class DiskDataset:
    """Read access to a written dataset."""

    def __init__(self, root: str | Path):
        self.root = Path(root)
        meta = _load_json(self.root / "meta.json")
        if meta.get("schema_version") != SCHEMA_VERSION:
            raise DatasetError(
                f"dataset schema version {meta.get('schema_version')} "
                f"not supported (expected {SCHEMA_VERSION})")
        self.meta = meta
        self.kind: str = meta["kind"]
        self.vocab = Vocabulary(tuple(meta["candidates"]),
                                tuple(meta["distractors"]))
        self.side: int = meta["side"]
        sdir = self.root / "samples"
        if not sdir.is_dir():
            raise DatasetError(f"missing samples directory in {self.root}")
        self.ids: list[str] = sorted(p.name for p in sdir.iterdir() if p.is_dir())
        if len(self.ids) != meta["count"]:
            raise DatasetError(f"meta.json reports {meta['count']} samples "
                               f"but {len(self.ids)} are present")

    def _ann(self, sample_id: str) -> dict:
        return _load_json(self.root / "samples" / sample_id / "ann.json")

    def background_id(self, sample_id: str) -> str | None:
        return self._ann(sample_id).get("background_id")

    def load(self, sample_id: str) -> SceneSample | TextOnlySample:
        sdir = self.root / "samples" / sample_id
        ann = self._ann(sample_id)
        placements = [WordPlacement.from_dict(d) for d in ann["placements"]]
        pad = PadBox.from_dict(ann["pad"])
        condition = one_hot(int(ann["condition_index"]), self.vocab.k)
        expected = SCENE_FILES if self.kind == "scene" else TEXT_ONLY_FILES
        for name in expected:
            if not (sdir / name).is_file():
                raise DatasetError(f"sample {sample_id} is missing {name}")
        text_layer = imageops.load_image(sdir / "text.png")
        stripped = imageops.load_image(sdir / "text_stripped.png")
        if self.kind == "text_only":
            return TextOnlySample(text_layer=text_layer,
                                  text_layer_stripped=stripped,
                                  placements=placements,
                                  target_word=ann["target_word"],
                                  condition=condition, pad=pad)
        return SceneSample(background=imageops.load_image(sdir / "bg.png"),
                           overlaid=imageops.load_image(sdir / "overlaid.png"),
                           text_layer=text_layer,
                           text_layer_stripped=stripped,
                           ideal=imageops.load_image(sdir / "ideal.png"),
                           placements=placements,
                           target_word=ann["target_word"],
                           condition=condition, pad=pad,
                           background_id=ann.get("background_id"))

    def __len__(self) -> int:
        return len(self.ids)

    def __iter__(self) -> Iterator[SceneSample | TextOnlySample]:
        for sid in self.ids:
            yield self.load(sid)


def read_dataset(root: str | Path) -> DiskDataset:
    return DiskDataset(root)


def generate_scene_samples(background_paths: list[Path], vocab: Vocabulary,
                           cfg: GenConfig, count: int,
                           master_seed: int) -> Iterator[SceneSample]:
    """Deterministic stream of scene samples cycling over the backgrounds."""
    if not background_paths:
        raise DatasetError("no background images supplied")
    for i in range(count):
        bg_path = background_paths[i % len(background_paths)]
        bg = imageops.load_image(bg_path)[:, :, :3]
        yield synthgen.make_scene_sample(bg, vocab, sample_rng(master_seed, i),
                                         cfg, background_id=Path(bg_path).stem)


def generate_text_only_samples(vocab: Vocabulary, cfg: GenConfig, count: int,
                               master_seed: int) -> Iterator[TextOnlySample]:
    for i in range(count):
        yield synthgen.make_text_only_record(vocab, sample_rng(master_seed, i), cfg)


def validate_dataset(ds: DiskDataset, max_samples: int | None = None) -> list[str]:
    """Check the ground-truth identities of a written dataset.

    Verifies, per sample: binary alpha; RGB zero where alpha is zero;
    stripped layer erases exactly the target placements; region masks
    partition the content area; and for scene sets the two compositing
    identities, which hold bit-exact even after 8-bit quantization.
    Returns a list of human-readable problems (empty means valid).
    """
    problems: list[str] = []
    ids = ds.ids if max_samples is None else ds.ids[:max_samples]
    for sid in ids:
        try:
            s = ds.load(sid)
        except DatasetError as exc:
            problems.append(f"{sid}: {exc}")
            continue
        alpha = s.text_layer[:, :, 3]
        if not np.all((alpha == 0) | (alpha == 1)):
            problems.append(f"{sid}: text layer alpha is not binary")
        if np.any(s.text_layer[alpha == 0, :3] != 0):
            problems.append(f"{sid}: nonzero RGB under zero alpha")
        restrip = synthgen.strip_words(s.text_layer, s.placements, s.target_word)
        if not np.array_equal(restrip, s.text_layer_stripped):
            problems.append(f"{sid}: stripped layer does not match re-render")
        try:
            masks = imageops.region_masks(s.placements, s.pad, ds.side)
        except Exception as exc:
            problems.append(f"{sid}: region masks failed: {exc}")
            masks = None
        if masks is not None:
            union = masks["target"] | masks["nontarget"] | masks["background"]
            overlap = (masks["target"] & masks["nontarget"]) \
                | (masks["target"] & masks["background"]) \
                | (masks["nontarget"] & masks["background"])
            if not np.array_equal(union, s.pad.content_mask(ds.side)) or overlap.any():
                problems.append(f"{sid}: region masks do not partition content")
        if isinstance(s, SceneSample):
            if not np.array_equal(s.overlaid,
                                  imageops.alpha_composite(s.background, s.text_layer)):
                problems.append(f"{sid}: overlaid != composite(bg, text layer)")
            if not np.array_equal(s.ideal,
                                  imageops.alpha_composite(s.background,
                                                           s.text_layer_stripped)):
                problems.append(f"{sid}: ideal != composite(bg, stripped layer)")
    return problems
