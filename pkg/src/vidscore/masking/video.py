"""Seeded frame-region masking: crop-retain plans and OCR-region blackout.

``crop_retain`` keeps one random 1/16-area sub-rectangle per frame (width/4 x
height/4), removing everything else; the position comes from a counter-based
generator keyed by (seed, frame index), so plans are pure functions of their
inputs.  An occlude variant (black out the 1/16 rectangle instead, keep the
rest) is exposed for sensitivity checks via ``occlude=True``.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from vidscore.domain import MaskPlan, Rect, VideoManifest
from vidscore.masking.keywords import KeywordSet
from vidscore.masking.tokens import tokenize

CROP_FRACTION = 0.25  # per-axis; retained area is 1/16 of the frame


class OcrOutputMissingError(ValueError):
    """Raised when an OCR-dependent plan is requested without OCR results."""


@dataclass(frozen=True)
class OcrWord:
    frame_index: int
    word: str
    box: Rect

    def __post_init__(self) -> None:
        x0, y0, x1, y1 = self.box
        if not (0.0 <= x0 <= x1 <= 1.0 and 0.0 <= y0 <= y1 <= 1.0):
            raise ValueError(f"OCR box {self.box} outside [0,1]^2")


def load_ocr_records(path: str | Path) -> list[OcrWord]:
    """Parse the line-delimited OCR format: frame_index word x0 y0 x1 y1."""

    words = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t") if "\t" in line else line.split()
            if len(parts) < 6:
                raise ValueError(f"{path}:{lineno}: expected 6 fields, got {len(parts)}")
            idx, word = int(parts[0]), parts[1]
            box = tuple(float(v) for v in parts[2:6])
            words.append(OcrWord(frame_index=idx, word=word, box=box))  # type: ignore[arg-type]
    return words


def _unit_interval(seed: int, frame_index: int, axis: int) -> float:
    """Deterministic uniform draw in [0, 1) from a counter-based hash."""

    msg = f"crop:{seed}:{frame_index}:{axis}".encode("utf-8")
    digest = hashlib.sha256(msg).digest()
    return int.from_bytes(digest[:8], "big") / 2.0**64


def _crop_rect(seed: int, frame_index: int) -> Rect:
    x0 = _unit_interval(seed, frame_index, 0) * (1.0 - CROP_FRACTION)
    y0 = _unit_interval(seed, frame_index, 1) * (1.0 - CROP_FRACTION)
    return (x0, y0, x0 + CROP_FRACTION, y0 + CROP_FRACTION)


def _keyword_token_set(keywords: KeywordSet) -> set[str]:
    toks: set[str] = set()
    for term in keywords.ngrams:
        toks.update(term.split(" "))
    return toks


def plan_video_mask(
    manifest: VideoManifest,
    strategy: str,
    seed: int,
    *,
    ocr_words: Sequence[OcrWord] | None = None,
    keywords: KeywordSet | None = None,
) -> MaskPlan:
    """Produce the per-frame masked-region plan for one video.

    ``ocr_regions`` needs ``ocr_words`` (and a keyword set to match against);
    a detected word is masked when any of its normalized tokens appears in
    any keyword n-gram.
    """

    if strategy == "none":
        return MaskPlan(strategy="none", seed=seed, per_frame_regions=())
    if strategy == "crop_retain":
        regions = tuple((_crop_rect(seed, i),) for i in range(manifest.frame_count))
        return MaskPlan(strategy="crop_retain", seed=seed, per_frame_regions=regions)
    if strategy == "ocr_regions":
        if ocr_words is None:
            raise OcrOutputMissingError("ocr output missing")
        if keywords is None:
            raise ValueError("ocr_regions requires a keyword set")
        match_tokens = _keyword_token_set(keywords)
        per_frame: list[list[Rect]] = [[] for _ in range(manifest.frame_count)]
        for word in ocr_words:
            if not 0 <= word.frame_index < manifest.frame_count:
                raise ValueError(
                    f"OCR frame index {word.frame_index} outside manifest "
                    f"(frame_count={manifest.frame_count})"
                )
            if any(tok in match_tokens for tok in tokenize(word.word)):
                per_frame[word.frame_index].append(word.box)
        return MaskPlan(
            strategy="ocr_regions",
            seed=seed,
            per_frame_regions=tuple(tuple(frame) for frame in per_frame),
        )
    raise ValueError(f"unknown mask strategy {strategy!r}")


def _pixel_box(rect: Rect, width: int, height: int) -> tuple[int, int, int, int]:
    x0, y0, x1, y1 = rect
    px0 = int(round(x0 * width))
    py0 = int(round(y0 * height))
    # Size from the rectangle extent, not from independently rounded corners,
    # so a quarter-width crop of a 400px frame is exactly 100px.
    pw = max(1, int(round((x1 - x0) * width)))
    ph = max(1, int(round((y1 - y0) * height)))
    px0 = min(px0, width - pw)
    py0 = min(py0, height - ph)
    return px0, py0, px0 + pw, py0 + ph


def apply_mask_plan(
    frames: Sequence[np.ndarray], plan: MaskPlan, *, occlude: bool = False
) -> list[np.ndarray]:
    """Apply a mask plan to frame arrays (H x W [x C]); inputs are not mutated.

    crop_retain returns the retained sub-rectangles (or, with ``occlude``,
    full frames with the rectangle blacked out); ocr_regions fills listed
    regions with black; none returns unchanged copies.
    """

    if plan.strategy == "none":
        return [np.array(f, copy=True) for f in frames]
    if len(plan.per_frame_regions) != len(frames):
        raise ValueError(
            f"plan covers {len(plan.per_frame_regions)} frames, got {len(frames)}"
        )
    out = []
    for frame, regions in zip(frames, plan.per_frame_regions):
        height, width = frame.shape[0], frame.shape[1]
        result = np.array(frame, copy=True)
        if plan.strategy == "crop_retain":
            (rect,) = regions
            px0, py0, px1, py1 = _pixel_box(rect, width, height)
            if occlude:
                result[py0:py1, px0:px1] = 0
            else:
                result = result[py0:py1, px0:px1].copy()
        else:  # ocr_regions
            for rect in regions:
                px0, py0, px1, py1 = _pixel_box(rect, width, height)
                result[py0:py1, px0:px1] = 0
        out.append(result)
    return out
