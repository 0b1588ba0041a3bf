"""Grounding and utility scores from four teacher-forced provider calls.

Grounding compares the summary's likelihood given (unmasked frames + masked
summary) against (masked summary alone); utility compares the true label's
likelihood given (masked frames + summary + question) against (masked frames
+ question).  Scores are natural-log differences of total logprobs, over the
full token sequence of the target (no length normalization; a per-token
average is emitted as a diagnostic column since longer summaries have larger
PMI magnitudes).
"""

from __future__ import annotations

import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

from vidscore.domain import (
    MaskPlan,
    MaskedText,
    ScoreCard,
    SummaryCandidate,
    TaskInstance,
    VideoManifest,
)
from vidscore.provider.base import (
    MASKED_REF_SUFFIX,
    Provider,
    ProviderError,
    ScoringContext,
    TokenLogProbs,
)
from vidscore.provider.templates import DEFAULT_TEMPLATES, TemplateSet


@dataclass(frozen=True)
class ScoringJob:
    """One video's scoring work: candidates with their masked texts and task."""

    manifest: VideoManifest
    candidates: tuple[SummaryCandidate, ...]
    task: TaskInstance
    masked_texts: tuple[MaskedText, ...]
    video_mask_plan: MaskPlan
    provider_id: str
    templates: TemplateSet = field(default_factory=TemplateSet)

    def __post_init__(self) -> None:
        object.__setattr__(self, "candidates", tuple(self.candidates))
        object.__setattr__(self, "masked_texts", tuple(self.masked_texts))

    def validate(self) -> list[str]:
        issues = []
        if len(self.candidates) != len(self.masked_texts):
            issues.append(
                f"{len(self.candidates)} candidates but {len(self.masked_texts)} masked texts"
            )
        if self.video_mask_plan.strategy != "none" and len(
            self.video_mask_plan.per_frame_regions
        ) != len(self.manifest.frame_paths):
            issues.append("mask plan frame count does not match manifest")
        return issues


def format_options(task: TaskInstance) -> str:
    return "\n".join(f"({label}) {text}" for label, text in task.options)


def masked_frame_refs(manifest: VideoManifest, plan: MaskPlan) -> tuple[str, ...]:
    """Frame references for the masked rendition of the video."""

    if plan.strategy == "none":
        return manifest.frame_paths
    return tuple(f"{p}{MASKED_REF_SUFFIX}" for p in manifest.frame_paths)


def grounding_score(
    candidate: SummaryCandidate,
    manifest: VideoManifest,
    masked_text: MaskedText,
    provider: Provider,
    templates: TemplateSet = DEFAULT_TEMPLATES,
) -> tuple[float, TokenLogProbs, TokenLogProbs]:
    """Summary logprob with video+masked-text minus with masked-text alone.

    Both calls reconstruct the full summary; the first conditions on the
    unmasked frames, the second sees no frames at all.  Returns the score in
    nats with the two per-token ledgers.
    """

    ctx_video = ScoringContext(
        text_blocks=(masked_text.text,),
        frames=manifest.frame_paths,
        template_id=templates.grounding_with_video,
    )
    ctx_text = ScoringContext(
        text_blocks=(masked_text.text,),
        frames=None,
        template_id=templates.grounding_text_only,
    )
    with_video = provider.score_target(ctx_video, candidate.text)
    text_only = provider.score_target(ctx_text, candidate.text)
    return with_video.total - text_only.total, with_video, text_only


def utility_score(
    candidate: SummaryCandidate,
    masked_frames: Sequence[str],
    task: TaskInstance,
    provider: Provider,
    templates: TemplateSet = DEFAULT_TEMPLATES,
) -> tuple[float, TokenLogProbs, TokenLogProbs]:
    """True-label logprob with the summary minus without it, both on masked video.

    The forced target is the option letter alone (the letter+text variant is
    a template choice).  Returns the score in nats with the two ledgers.
    """

    options_block = format_options(task)
    frames = tuple(masked_frames)
    ctx_with = ScoringContext(
        text_blocks=(candidate.text, task.question, options_block),
        frames=frames,
        template_id=templates.utility_with_summary,
    )
    ctx_without = ScoringContext(
        text_blocks=(task.question, options_block),
        frames=frames,
        template_id=templates.utility_no_summary,
    )
    with_summary = provider.score_target(ctx_with, task.truth_label)
    without_summary = provider.score_target(ctx_without, task.truth_label)
    return with_summary.total - without_summary.total, with_summary, without_summary


def _score_one(
    job: ScoringJob, provider: Provider, index: int
) -> ScoreCard:
    candidate = job.candidates[index]
    masked_text = job.masked_texts[index]
    frames = masked_frame_refs(job.manifest, job.video_mask_plan)
    grounding, led_a, led_b = grounding_score(
        candidate, job.manifest, masked_text, provider, job.templates
    )
    utility, led_c, led_d = utility_score(
        candidate, frames, job.task, provider, job.templates
    )
    ledger = (led_a.logprobs, led_b.logprobs, led_c.logprobs, led_d.logprobs)
    finite = all(math.isfinite(v) for entry in ledger for v in entry)
    return ScoreCard(
        candidate_id=candidate.candidate_id,
        grounding=grounding,
        utility=utility,
        token_ledger=ledger,
        provider_id=provider.provider_id,
        template_ids=job.templates.scoring_ids(),
        valid=finite,
    )


def _invalid_card(job: ScoringJob, index: int, provider: Provider) -> ScoreCard:
    return ScoreCard(
        candidate_id=job.candidates[index].candidate_id,
        grounding=float("nan"),
        utility=float("nan"),
        token_ledger=((), (), (), ()),
        provider_id=provider.provider_id,
        template_ids=job.templates.scoring_ids(),
        valid=False,
    )


def score_all(
    job: ScoringJob, provider: Provider, *, max_inflight: int = 1
) -> list[ScoreCard]:
    """Score every candidate; failures isolate to the failing candidate.

    A provider error on one candidate yields an invalid card for it; if every
    candidate fails, the first error is re-raised as a job-level failure.
    Results keep the input candidate order.
    """

    issues = job.validate()
    if issues:
        raise ValueError("; ".join(issues))
    indices = range(len(job.candidates))

    def run(i: int) -> tuple[ScoreCard, ProviderError | None]:
        try:
            return _score_one(job, provider, i), None
        except ProviderError as exc:
            return _invalid_card(job, i, provider), exc

    if max_inflight > 1:
        with ThreadPoolExecutor(max_workers=max_inflight) as pool:
            results = list(pool.map(run, indices))
    else:
        results = [run(i) for i in indices]

    errors = [err for _, err in results if err is not None]
    if errors and len(errors) == len(job.candidates):
        raise errors[0]
    return [card for card, _ in results]


# -- exports -------------------------------------------------------------

def per_token_average(card: ScoreCard, which: str) -> float:
    """Score divided by the numerator call's token count (diagnostic)."""

    if which == "grounding":
        value, ledger = card.grounding, card.token_ledger[0]
    elif which == "utility":
        value, ledger = card.utility, card.token_ledger[2]
    else:
        raise ValueError(f"unknown score name {which!r}")
    return value / max(1, len(ledger))


def cards_to_csv_extended(cards: Sequence[ScoreCard]) -> str:
    """Scorecard CSV with validity and per-token diagnostic columns."""

    buf = io.StringIO()
    buf.write(
        "candidate_id,grounding,utility,provider_id,valid,"
        "grounding_per_token,utility_per_token\n"
    )
    for c in cards:
        gpt = per_token_average(c, "grounding")
        upt = per_token_average(c, "utility")
        buf.write(
            f"{c.candidate_id},{c.grounding!r},{c.utility!r},{c.provider_id},"
            f"{int(c.valid)},{gpt!r},{upt!r}\n"
        )
    return buf.getvalue()


def ledger_dump(cards: Sequence[ScoreCard]) -> str:
    """Full-ledger JSON dump for audit."""

    def enc(v: float) -> object:
        return v if math.isfinite(v) else repr(v)

    payload = [
        {
            "candidate_id": c.candidate_id,
            "provider_id": c.provider_id,
            "template_ids": list(c.template_ids),
            "valid": c.valid,
            "grounding": enc(c.grounding),
            "utility": enc(c.utility),
            "ledgers": {
                name: [enc(v) for v in entry]
                for name, entry in zip(
                    (
                        "grounding_with_video",
                        "grounding_text_only",
                        "utility_with_summary",
                        "utility_no_summary",
                    ),
                    c.token_ledger,
                )
            },
        }
        for c in cards
    ]
    return json.dumps(payload, indent=2, sort_keys=True, ensure_ascii=False) + "\n"
