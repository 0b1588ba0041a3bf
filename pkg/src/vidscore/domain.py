"""Shared value objects for the scoring pipeline, plus record (de)serialization.

All types are frozen dataclasses: construct once, share freely across workers.
Types whose invariants must hold for the pipeline to make sense at all
(candidates, tasks, response records) validate in ``__post_init__`` and raise
``ValueError``.  Types that arrive from external storage and may legitimately
be broken (manifests, scorecards) are validated by the ``validate_*``
functions, which return a list of violation strings instead of raising.

Record files are line-delimited JSON (one object per line); scorecards also
export to a flat CSV with columns (candidate_id, grounding, utility,
provider_id).
"""

from __future__ import annotations

import io
import json
import math
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Any, Iterable, Sequence

MASK_TOKEN = "<MASK>"

CANDIDATE_SOURCES = frozenset({"sampled", "cot", "external"})
MASK_STRATEGIES = frozenset({"crop_retain", "ocr_regions", "none"})
CONDITIONS = frozenset({"video_only", "naive", "max_u", "max_g", "cot"})

# A rectangle in normalized [0,1]^2 coordinates: (x0, y0, x1, y1).
Rect = tuple[float, float, float, float]

LEDGER_IDENTITY_TOL = 1e-9


@dataclass(frozen=True)
class VideoManifest:
    """One video: an ordered set of pre-extracted frame image references."""

    video_id: str
    frame_paths: tuple[str, ...]
    frame_count: int
    duration_s: float
    dataset_tag: str = "custom"

    def __post_init__(self) -> None:
        object.__setattr__(self, "frame_paths", tuple(self.frame_paths))


@dataclass(frozen=True)
class SummaryCandidate:
    """One sampled summary with its sampling temperature and provenance."""

    candidate_id: str
    text: str
    temperature: float
    source: str = "sampled"

    def __post_init__(self) -> None:
        if not self.text:
            raise ValueError("candidate text must be nonempty")
        if MASK_TOKEN in self.text:
            raise ValueError(f"reserved token {MASK_TOKEN!r} present in candidate text")
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")
        if self.source not in CANDIDATE_SOURCES:
            raise ValueError(f"unknown candidate source {self.source!r}")


@dataclass(frozen=True)
class TaskInstance:
    """A multiple-choice question about one video, with the true label."""

    question: str
    options: tuple[tuple[str, str], ...]
    truth_label: str

    def __post_init__(self) -> None:
        object.__setattr__(self, "options", tuple((str(a), str(b)) for a, b in self.options))
        labels = [label for label, _ in self.options]
        if len(labels) < 2:
            raise ValueError("task needs at least 2 options")
        if len(set(labels)) != len(labels):
            raise ValueError("option labels must be unique")
        if self.truth_label not in labels:
            raise ValueError(f"truth label {self.truth_label!r} not among options")

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(label for label, _ in self.options)


@dataclass(frozen=True)
class MaskedText:
    """A summary with keyword spans replaced by the mask token.

    ``masked_spans`` locates each mask token in ``text`` as (start, end,
    original_ngram): ``text[start:end]`` is the mask literal and
    ``original_ngram`` is the source text it replaced.
    """

    text: str
    masked_spans: tuple[tuple[int, int, str], ...]
    keyword_set_id: str

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "masked_spans", tuple((int(s), int(e), g) for s, e, g in self.masked_spans)
        )


@dataclass(frozen=True)
class MaskPlan:
    """Seeded, deterministic description of per-frame masked regions.

    ``per_frame_regions`` holds one tuple of rectangles per frame; empty for
    strategy ``none``.  ``crop_retain`` plans carry exactly one rectangle per
    frame, the retained sub-rectangle of 1/16 area.
    """

    strategy: str
    seed: int
    per_frame_regions: tuple[tuple[Rect, ...], ...]

    def __post_init__(self) -> None:
        if self.strategy not in MASK_STRATEGIES:
            raise ValueError(f"unknown mask strategy {self.strategy!r}")
        frozen = tuple(
            tuple(tuple(float(v) for v in rect) for rect in frame)
            for frame in self.per_frame_regions
        )
        object.__setattr__(self, "per_frame_regions", frozen)
        for frame in self.per_frame_regions:
            for x0, y0, x1, y1 in frame:
                if not (0.0 <= x0 <= x1 <= 1.0 and 0.0 <= y0 <= y1 <= 1.0):
                    raise ValueError(f"region {(x0, y0, x1, y1)} outside [0,1]^2")


@dataclass(frozen=True)
class ScoreCard:
    """Per-candidate grounding and utility scores with raw logprob ledgers.

    The ledger holds four per-token logprob lists, in call order:
    grounding numerator (with video), grounding denominator (text only),
    utility numerator (with summary), utility denominator (without summary).
    Cards whose ledgers contain non-finite entries are marked invalid rather
    than dropped.
    """

    candidate_id: str
    grounding: float
    utility: float
    token_ledger: tuple[tuple[float, ...], ...]
    provider_id: str
    template_ids: tuple[str, ...] = ()
    valid: bool = True

    def __post_init__(self) -> None:
        ledger = tuple(tuple(float(v) for v in entry) for entry in self.token_ledger)
        if len(ledger) != 4:
            raise ValueError("token ledger must have exactly four entries")
        object.__setattr__(self, "token_ledger", ledger)
        object.__setattr__(self, "template_ids", tuple(self.template_ids))


@dataclass(frozen=True)
class ResponseRecord:
    """One participant's answer to one stimulus, with response time."""

    participant_id: str
    condition: str
    stimulus_id: str
    correct: bool
    response_time_s: float

    def __post_init__(self) -> None:
        if self.condition not in CONDITIONS:
            raise ValueError(f"unknown condition tag {self.condition!r}")
        if not self.response_time_s > 0:
            raise ValueError("response_time_s must be > 0")


def validate_manifest(manifest: VideoManifest, root: str | Path | None = None) -> list[str]:
    """Check manifest invariants; returns violations (empty list = valid).

    With ``root`` given, frame references are also checked for readability;
    an unreadable frame becomes a violation entry, never an exception.
    """

    violations: list[str] = []
    if not manifest.video_id:
        violations.append("empty video_id")
    if not manifest.frame_paths:
        violations.append("frame_paths is empty")
    if manifest.frame_count != len(manifest.frame_paths):
        violations.append(
            f"count mismatch: frame_count={manifest.frame_count} "
            f"but {len(manifest.frame_paths)} paths"
        )
    if manifest.frame_count <= 0:
        violations.append("frame_count must be positive")
    if manifest.duration_s < 0:
        violations.append(f"negative duration: {manifest.duration_s}")
    if root is not None:
        base = Path(root)
        for ref in manifest.frame_paths:
            path = base / ref
            try:
                readable = path.is_file()
            except OSError:
                readable = False
            if not readable:
                violations.append(f"unreadable frame reference: {ref}")
    return violations


def validate_scorecard(card: ScoreCard) -> list[str]:
    """Check the ledger-sum identities and finiteness; reports, never throws."""

    violations: list[str] = []
    finite = all(math.isfinite(v) for entry in card.token_ledger for v in entry)
    if not finite:
        if card.valid:
            violations.append("invalid card: non-finite ledger entry on card marked valid")
        return violations
    if not card.valid:
        # Marking a finite card invalid is allowed (e.g. transport failure),
        # and the sum identities are not required to hold for it.
        return violations
    a, b, c, d = (sum(entry) for entry in card.token_ledger)
    if not math.isfinite(card.grounding) or abs(card.grounding - (a - b)) > LEDGER_IDENTITY_TOL:
        violations.append(
            f"grounding {card.grounding!r} != ledger difference {a - b!r}"
        )
    if not math.isfinite(card.utility) or abs(card.utility - (c - d)) > LEDGER_IDENTITY_TOL:
        violations.append(f"utility {card.utility!r} != ledger difference {c - d!r}")
    return violations


# --- canonical JSON helpers -------------------------------------------------

def canonical_json(value: Any) -> str:
    return json.dumps(value, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def _float_or_string(v: float) -> Any:
    # JSON has no Infinity/NaN; encode them as strings for round-tripping.
    if math.isfinite(v):
        return v
    return repr(v)


def _parse_float(v: Any) -> float:
    # Accepts the string forms "inf" / "-inf" / "nan" written by the encoder.
    return float(v)


# --- record encoding / decoding ---------------------------------------------

def manifest_to_dict(m: VideoManifest) -> dict[str, Any]:
    return {
        "video_id": m.video_id,
        "frame_paths": list(m.frame_paths),
        "frame_count": m.frame_count,
        "duration_s": m.duration_s,
        "dataset_tag": m.dataset_tag,
    }


def manifest_from_dict(d: dict[str, Any]) -> VideoManifest:
    return VideoManifest(
        video_id=str(d["video_id"]),
        frame_paths=tuple(str(p) for p in d["frame_paths"]),
        frame_count=int(d["frame_count"]),
        duration_s=float(d["duration_s"]),
        dataset_tag=str(d.get("dataset_tag", "custom")),
    )


def candidate_to_dict(c: SummaryCandidate) -> dict[str, Any]:
    return {
        "candidate_id": c.candidate_id,
        "text": c.text,
        "temperature": c.temperature,
        "source": c.source,
    }


def candidate_from_dict(d: dict[str, Any]) -> SummaryCandidate:
    return SummaryCandidate(
        candidate_id=str(d["candidate_id"]),
        text=str(d["text"]),
        temperature=float(d["temperature"]),
        source=str(d.get("source", "sampled")),
    )


def task_to_dict(t: TaskInstance) -> dict[str, Any]:
    return {
        "question": t.question,
        "options": [list(pair) for pair in t.options],
        "truth_label": t.truth_label,
    }


def task_from_dict(d: dict[str, Any]) -> TaskInstance:
    return TaskInstance(
        question=str(d["question"]),
        options=tuple((str(a), str(b)) for a, b in d["options"]),
        truth_label=str(d["truth_label"]),
    )


def masked_text_to_dict(m: MaskedText) -> dict[str, Any]:
    return {
        "text": m.text,
        "masked_spans": [list(span) for span in m.masked_spans],
        "keyword_set_id": m.keyword_set_id,
    }


def masked_text_from_dict(d: dict[str, Any]) -> MaskedText:
    return MaskedText(
        text=str(d["text"]),
        masked_spans=tuple((int(s), int(e), str(g)) for s, e, g in d["masked_spans"]),
        keyword_set_id=str(d["keyword_set_id"]),
    )


def mask_plan_to_dict(p: MaskPlan) -> dict[str, Any]:
    return {
        "strategy": p.strategy,
        "seed": p.seed,
        "per_frame_regions": [[list(rect) for rect in frame] for frame in p.per_frame_regions],
    }


def mask_plan_from_dict(d: dict[str, Any]) -> MaskPlan:
    return MaskPlan(
        strategy=str(d["strategy"]),
        seed=int(d["seed"]),
        per_frame_regions=tuple(
            tuple(tuple(float(v) for v in rect) for rect in frame)
            for frame in d["per_frame_regions"]
        ),
    )


def scorecard_to_dict(c: ScoreCard) -> dict[str, Any]:
    return {
        "candidate_id": c.candidate_id,
        "grounding": _float_or_string(c.grounding),
        "utility": _float_or_string(c.utility),
        "token_ledger": [[_float_or_string(v) for v in entry] for entry in c.token_ledger],
        "provider_id": c.provider_id,
        "template_ids": list(c.template_ids),
        "valid": c.valid,
    }


def scorecard_from_dict(d: dict[str, Any]) -> ScoreCard:
    return ScoreCard(
        candidate_id=str(d["candidate_id"]),
        grounding=_parse_float(d["grounding"]),
        utility=_parse_float(d["utility"]),
        token_ledger=tuple(
            tuple(_parse_float(v) for v in entry) for entry in d["token_ledger"]
        ),
        provider_id=str(d["provider_id"]),
        template_ids=tuple(str(t) for t in d.get("template_ids", ())),
        valid=bool(d.get("valid", True)),
    )


def response_record_to_dict(r: ResponseRecord) -> dict[str, Any]:
    return asdict(r)


def response_record_from_dict(d: dict[str, Any]) -> ResponseRecord:
    return ResponseRecord(
        participant_id=str(d["participant_id"]),
        condition=str(d["condition"]),
        stimulus_id=str(d["stimulus_id"]),
        correct=bool(d["correct"]),
        response_time_s=float(d["response_time_s"]),
    )


def dump_jsonl(dicts: Iterable[dict[str, Any]], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for d in dicts:
            fh.write(canonical_json(d))
            fh.write("\n")


def load_jsonl(path: str | Path) -> list[dict[str, Any]]:
    out: list[dict[str, Any]] = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                out.append(json.loads(line))
    return out


def cards_to_csv(cards: Sequence[ScoreCard]) -> str:
    """Flat scorecard CSV: candidate_id, grounding, utility, provider_id."""

    buf = io.StringIO()
    buf.write("candidate_id,grounding,utility,provider_id\n")
    for c in cards:
        buf.write(f"{c.candidate_id},{c.grounding!r},{c.utility!r},{c.provider_id}\n")
    return buf.getvalue()
