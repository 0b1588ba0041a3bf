"""Dataset ingestion: presets, uniform frame sampling, directory loading.

Expected directory layout (one subdirectory per video)::

    root/
      <video_id>/
        frames/<image files>
        manifest.jsonl     one manifest record
        tasks.jsonl        one record per question
        candidates.jsonl   one record per summary candidate

Task and candidate records carry a ``video_id`` field tying them to their
video.  Loading is read-only and pure given directory contents.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from vidscore.domain import (
    SummaryCandidate,
    TaskInstance,
    VideoManifest,
    candidate_from_dict,
    manifest_from_dict,
    task_from_dict,
    validate_manifest,
)
from vidscore.masking.keywords import TfidfConfig


@dataclass(frozen=True)
class DatasetPreset:
    """Per-dataset knobs: frame budget, tf-idf filter, default mask strategy."""

    name: str
    frame_count: int
    tfidf: TfidfConfig
    mask_strategy: str
    questions_per_video: int = 1
    use_author_keywords: bool = False
    notes: str = ""

    def __post_init__(self) -> None:
        if self.frame_count < 1:
            raise ValueError("frame_count must be >= 1")


PRESETS: dict[str, DatasetPreset] = {
    "learningpaper24": DatasetPreset(
        name="learningpaper24",
        frame_count=20,
        tfidf=TfidfConfig(ngram_min=1, ngram_max=3, doc_freq_cutoff=0.10, score_threshold=0.0025),
        mask_strategy="ocr_regions",
        questions_per_video=1,
        use_author_keywords=True,
    ),
    "sutd-trafficqa": DatasetPreset(
        name="sutd-trafficqa",
        frame_count=20,
        tfidf=TfidfConfig(ngram_min=1, ngram_max=3, doc_freq_cutoff=0.30, score_threshold=0.01),
        mask_strategy="crop_retain",
        questions_per_video=4,
    ),
    "longvideobench": DatasetPreset(
        name="longvideobench",
        frame_count=32,
        tfidf=TfidfConfig(ngram_min=1, ngram_max=3, doc_freq_cutoff=0.50, score_threshold=0.006),
        mask_strategy="crop_retain",
        questions_per_video=1,
        notes=(
            "upstream tooling extracts the 32 frames with its own sampler; "
            "this preset uses the uniform rule, which may diverge"
        ),
    ),
    "fixture": DatasetPreset(
        name="fixture",
        frame_count=4,
        tfidf=TfidfConfig(ngram_min=1, ngram_max=1, doc_freq_cutoff=0.25, score_threshold=0.01),
        mask_strategy="crop_retain",
        questions_per_video=1,
    ),
}


def sample_frame_indices(total_frames: int, n: int) -> list[int]:
    """Uniformly spaced frame indices, endpoints included.

    idx_k = round(k * (F - 1) / (n - 1)) for k = 0..n-1 (round half to even,
    Python's built-in); the single-frame case takes the middle frame.
    """

    if total_frames < 1:
        raise ValueError("total_frames must be >= 1")
    if n < 1:
        raise ValueError("n must be >= 1")
    if n > total_frames:
        raise ValueError(f"cannot sample {n} frames from {total_frames}")
    if n == 1:
        return [(total_frames - 1) // 2]
    step = (total_frames - 1) / (n - 1)
    return [int(round(k * step)) for k in range(n)]


@dataclass(frozen=True)
class LoadResult:
    manifests: tuple[VideoManifest, ...]
    tasks: dict[str, tuple[TaskInstance, ...]]
    candidates: dict[str, tuple[SummaryCandidate, ...]]
    issues: tuple[str, ...] = field(default=())


def _read_records(path: Path, issues: list[str]) -> list[tuple[int, dict]]:
    records = []
    try:
        with open(path, "r", encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    records.append((lineno, json.loads(line)))
                except json.JSONDecodeError as exc:
                    issues.append(f"{path}:{lineno}: invalid json ({exc.msg})")
    except OSError as exc:
        issues.append(f"{path}: unreadable ({exc})")
    return records


def load_dataset(root: str | Path, preset: DatasetPreset) -> LoadResult:
    """Load and validate all videos under ``root`` for the given preset.

    Schema violations become issue strings ("file:line: message"); broken
    records are skipped rather than aborting the load.
    """

    root = Path(root)
    issues: list[str] = []
    manifests: list[VideoManifest] = []
    tasks: dict[str, list[TaskInstance]] = {}
    candidates: dict[str, list[SummaryCandidate]] = {}

    video_dirs = sorted(p for p in root.iterdir() if p.is_dir()) if root.is_dir() else []
    if not video_dirs:
        issues.append(f"warning: no video directories found under {root}")

    for vdir in video_dirs:
        manifest_path = vdir / "manifest.jsonl"
        if not manifest_path.is_file():
            issues.append(f"{manifest_path}: missing manifest record")
            continue
        for lineno, record in _read_records(manifest_path, issues):
            try:
                manifest = manifest_from_dict(record)
            except (KeyError, ValueError, TypeError) as exc:
                issues.append(f"{manifest_path}:{lineno}: bad manifest ({exc})")
                continue
            if manifest.video_id != vdir.name:
                issues.append(
                    f"{manifest_path}:{lineno}: video_id {manifest.video_id!r} "
                    f"does not match directory {vdir.name!r}"
                )
            for violation in validate_manifest(manifest, root=root):
                issues.append(f"{manifest_path}:{lineno}: {violation}")
            manifests.append(manifest)

        for lineno, record in _read_records(vdir / "tasks.jsonl", issues):
            try:
                video_id = str(record["video_id"])
                task = task_from_dict(record)
            except (KeyError, ValueError, TypeError) as exc:
                issues.append(f"{vdir / 'tasks.jsonl'}:{lineno}: bad task ({exc})")
                continue
            tasks.setdefault(video_id, []).append(task)

        for lineno, record in _read_records(vdir / "candidates.jsonl", issues):
            try:
                video_id = str(record["video_id"])
                candidate = candidate_from_dict(record)
            except (KeyError, ValueError, TypeError) as exc:
                issues.append(f"{vdir / 'candidates.jsonl'}:{lineno}: bad candidate ({exc})")
                continue
            candidates.setdefault(video_id, []).append(candidate)

    for manifest in manifests:
        n_tasks = len(tasks.get(manifest.video_id, ()))
        if n_tasks and n_tasks != preset.questions_per_video:
            issues.append(
                f"warning: {manifest.video_id}: {n_tasks} questions, preset "
                f"{preset.name!r} expects {preset.questions_per_video}"
            )

    return LoadResult(
        manifests=tuple(manifests),
        tasks={k: tuple(v) for k, v in tasks.items()},
        candidates={k: tuple(v) for k, v in candidates.items()},
        issues=tuple(issues),
    )
