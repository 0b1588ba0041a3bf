"""Provider interface: contexts, token logprobs, errors, request hashing."""

from __future__ import annotations

import hashlib
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Any, Mapping, Sequence

from vidscore.domain import SummaryCandidate, canonical_json

MASKED_REF_SUFFIX = "#masked"


class ProviderError(RuntimeError):
    """Base class for provider/transport failures."""


class EchoScoringUnsupportedError(ProviderError):
    """The endpoint cannot return logprobs for a forced continuation."""


class TransportError(ProviderError):
    """Retryable network-level failure."""


class ReplayMissError(ProviderError):
    """Replay transport saw a request with no recorded fixture."""


class GenerationUnavailableError(ProviderError):
    """The transport cannot generate candidates (e.g. replay gaps)."""


@dataclass(frozen=True)
class ScoringContext:
    """Conditioning input for one scoring call.

    ``text_blocks`` is the ordered structured content (masked summary,
    summary, question, options, ...); the template referenced by
    ``template_id`` decides how blocks are rendered into a prompt.  Frames
    are optional: text-only contexts are legal.  A frame reference ending in
    ``#masked`` denotes the masked rendition of that frame.
    """

    text_blocks: tuple[str, ...]
    frames: tuple[str, ...] | None = None
    template_id: str = "default"

    def __post_init__(self) -> None:
        object.__setattr__(self, "text_blocks", tuple(self.text_blocks))
        if self.frames is not None:
            object.__setattr__(self, "frames", tuple(self.frames))
        if not self.text_blocks:
            raise ValueError("scoring context needs at least one text block")


@dataclass(frozen=True)
class TokenLogProbs:
    """Per-token logprobs of a forced continuation, with their sum."""

    tokens: tuple[tuple[str, float], ...]
    total: float

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "tokens", tuple((str(t), float(lp)) for t, lp in self.tokens)
        )
        for _, lp in self.tokens:
            if lp > 0:
                raise ValueError(f"logprob {lp} > 0")
        s = sum(lp for _, lp in self.tokens)
        if math.isfinite(s) and math.isfinite(self.total):
            if abs(s - self.total) > 1e-9:
                raise ValueError(f"total {self.total} != sum of logprobs {s}")
        elif not (s == self.total or (math.isnan(s) and math.isnan(self.total))):
            raise ValueError(f"non-finite total {self.total} inconsistent with sum {s}")

    @classmethod
    def from_pairs(cls, pairs: Sequence[tuple[str, float]]) -> "TokenLogProbs":
        return cls(tokens=tuple(pairs), total=sum(lp for _, lp in pairs))

    @property
    def logprobs(self) -> tuple[float, ...]:
        return tuple(lp for _, lp in self.tokens)

    def to_dict(self) -> dict[str, Any]:
        def enc(v: float) -> Any:
            return v if math.isfinite(v) else repr(v)

        return {
            "tokens": [[t, enc(lp)] for t, lp in self.tokens],
            "total": enc(self.total),
        }

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "TokenLogProbs":
        return cls(
            tokens=tuple((str(t), float(lp)) for t, lp in d["tokens"]),
            total=float(d["total"]),
        )


def context_to_dict(ctx: ScoringContext) -> dict[str, Any]:
    return {
        "text_blocks": list(ctx.text_blocks),
        "frames": list(ctx.frames) if ctx.frames is not None else None,
        "template_id": ctx.template_id,
    }


def request_key(op: str, ctx: ScoringContext, payload: Any) -> str:
    """Stable hash identifying one provider request, used by record/replay."""

    body = canonical_json({"op": op, "ctx": context_to_dict(ctx), "payload": payload})
    return hashlib.sha256(body.encode("utf-8")).hexdigest()


class Provider(ABC):
    """Teacher-forced scoring and candidate generation against one model."""

    provider_id: str = "provider"

    @abstractmethod
    def score_target(self, ctx: ScoringContext, target: str) -> TokenLogProbs:
        """Per-token logprobs of ``target`` as a forced continuation of ``ctx``."""

    def option_logprobs(
        self, ctx: ScoringContext, labels: Sequence[str]
    ) -> dict[str, TokenLogProbs]:
        """Forced-continuation logprob of each answer label, scored independently.

        No renormalization across options: score ratios of the same label
        cancel any shared normalizer, so raw totals are the default.
        """

        if len(labels) < 2:
            raise ValueError("option scoring needs at least 2 labels")
        return {label: self.score_target(ctx, label) for label in labels}

    @abstractmethod
    def sample_candidates(
        self,
        ctx: ScoringContext,
        k: int,
        temperatures: Sequence[float],
        *,
        id_prefix: str = "cand",
    ) -> list[SummaryCandidate]:
        """Generate ``k`` candidates, one call per temperature."""

    def _check_sampling_args(self, k: int, temperatures: Sequence[float]) -> None:
        if k < 1:
            raise ValueError("k must be >= 1")
        if len(temperatures) != k:
            raise ValueError(f"need {k} temperatures, got {len(temperatures)}")
