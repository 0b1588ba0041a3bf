"""Exact mock provider defined by a small joint distribution over (V, T, Y).

The mock interprets scoring contexts symbolically: frame references resolve
to a video symbol (directly or through an alias map), text blocks that equal
a summary symbol or a masked-summary string are treated as observations of T
or T_masked, and everything else (instructions, questions, option lists) is
ignored as constant conditioning.  Conditional probabilities are computed by
exhaustive enumeration of the table, so scores against this provider are
exact and fully deterministic.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping, Sequence

from vidscore.domain import SummaryCandidate, canonical_json
from vidscore.provider.base import (
    MASKED_REF_SUFFIX,
    Provider,
    ProviderError,
    ScoringContext,
    TokenLogProbs,
    context_to_dict,
)


@dataclass(frozen=True)
class JointSpec:
    """Finite joint distribution P(V, T, Y) with masking maps.

    ``table`` is row-major over (v, t, y).  The masking maps send each symbol
    to its masked rendition; a constant map makes the masked variable carry
    no information, which is the regime where the masked-inference scores
    coincide exactly with pointwise mutual information.
    """

    v_symbols: tuple[str, ...]
    t_symbols: tuple[str, ...]
    y_symbols: tuple[str, ...]
    table: tuple[float, ...]
    v_mask: Mapping[str, str]
    t_mask: Mapping[str, str]
    spec_id: str = "joint"

    def __post_init__(self) -> None:
        object.__setattr__(self, "v_symbols", tuple(self.v_symbols))
        object.__setattr__(self, "t_symbols", tuple(self.t_symbols))
        object.__setattr__(self, "y_symbols", tuple(self.y_symbols))
        object.__setattr__(self, "table", tuple(float(p) for p in self.table))
        expected = len(self.v_symbols) * len(self.t_symbols) * len(self.y_symbols)
        if len(self.table) != expected:
            raise ValueError(f"table needs {expected} entries, got {len(self.table)}")
        if any(p < 0 for p in self.table):
            raise ValueError("table entries must be >= 0")
        total = sum(self.table)
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"table sums to {total}, expected 1")
        for sym in self.v_symbols:
            if sym not in self.v_mask:
                raise ValueError(f"v_mask missing symbol {sym!r}")
        for sym in self.t_symbols:
            if sym not in self.t_mask:
                raise ValueError(f"t_mask missing symbol {sym!r}")

    @classmethod
    def with_constant_masks(
        cls,
        v_symbols: Sequence[str],
        t_symbols: Sequence[str],
        y_symbols: Sequence[str],
        table: Sequence[float],
        spec_id: str = "joint",
    ) -> "JointSpec":
        """Joint spec whose masked variables are uninformative constants."""

        return cls(
            v_symbols=tuple(v_symbols),
            t_symbols=tuple(t_symbols),
            y_symbols=tuple(y_symbols),
            table=tuple(table),
            v_mask={v: "__vmask__" for v in v_symbols},
            t_mask={t: "__tmask__" for t in t_symbols},
            spec_id=spec_id,
        )

    def cell(self, iv: int, it: int, iy: int) -> float:
        return self.table[(iv * len(self.t_symbols) + it) * len(self.y_symbols) + iy]

    def _mass(
        self,
        v: str | None = None,
        t: str | None = None,
        y: str | None = None,
        v_masked: str | None = None,
        t_masked: str | None = None,
    ) -> float:
        total = 0.0
        for iv, vs in enumerate(self.v_symbols):
            if v is not None and vs != v:
                continue
            if v_masked is not None and self.v_mask[vs] != v_masked:
                continue
            for it, ts in enumerate(self.t_symbols):
                if t is not None and ts != t:
                    continue
                if t_masked is not None and self.t_mask[ts] != t_masked:
                    continue
                for iy, ys in enumerate(self.y_symbols):
                    if y is not None and ys != y:
                        continue
                    total += self.cell(iv, it, iy)
        return total

    def conditional(self, kind: str, value: str, obs: Mapping[str, str]) -> float:
        """P(kind=value | obs) for kind in {"t", "y"} by table enumeration."""

        constraints = dict(obs)
        denom = self._mass(**constraints)
        if denom <= 0:
            raise ProviderError(
                f"context {constraints!r} has zero probability under the joint spec"
            )
        constraints[kind] = value
        return self._mass(**constraints) / denom

    def to_dict(self) -> dict[str, Any]:
        return {
            "spec_id": self.spec_id,
            "v_symbols": list(self.v_symbols),
            "t_symbols": list(self.t_symbols),
            "y_symbols": list(self.y_symbols),
            "table": list(self.table),
            "v_mask": dict(self.v_mask),
            "t_mask": dict(self.t_mask),
        }

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "JointSpec":
        return cls(
            v_symbols=tuple(d["v_symbols"]),
            t_symbols=tuple(d["t_symbols"]),
            y_symbols=tuple(d["y_symbols"]),
            table=tuple(d["table"]),
            v_mask=dict(d["v_mask"]),
            t_mask=dict(d["t_mask"]),
            spec_id=str(d.get("spec_id", "joint")),
        )


def load_jointspec_file(path: str | Path) -> tuple[JointSpec, dict[str, str]]:
    """Load a jointspec JSON file: {"spec": ..., "frame_aliases": {...}}."""

    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    spec = JointSpec.from_dict(data["spec"])
    aliases = {str(k): str(v) for k, v in data.get("frame_aliases", {}).items()}
    return spec, aliases


class MockProvider(Provider):
    """Provider whose conditionals come from a JointSpec; one token per target."""

    def __init__(
        self,
        spec: JointSpec,
        seed: int = 0,
        frame_aliases: Mapping[str, str] | None = None,
        provider_id: str | None = None,
    ) -> None:
        self.spec = spec
        self.seed = seed
        self.frame_aliases = dict(frame_aliases or {})
        self.provider_id = provider_id or f"mock:{spec.spec_id}"
        self._masked_t_values = set(spec.t_mask.values())

    # -- context interpretation ------------------------------------------

    def _resolve_video(self, frames: Sequence[str]) -> tuple[str, bool]:
        symbols = set()
        masked_flags = set()
        for ref in frames:
            masked = ref.endswith(MASKED_REF_SUFFIX)
            base = ref[: -len(MASKED_REF_SUFFIX)] if masked else ref
            if base in self.spec.v_symbols:
                sym = base
            elif base in self.frame_aliases:
                sym = self.frame_aliases[base]
            else:
                raise ProviderError(f"frame reference {ref!r} unknown to joint spec")
            symbols.add(sym)
            masked_flags.add(masked)
        if len(symbols) != 1 or len(masked_flags) != 1:
            raise ProviderError("frames must reference one video, uniformly masked or not")
        return symbols.pop(), masked_flags.pop()

    def _observations(self, ctx: ScoringContext) -> dict[str, str]:
        obs: dict[str, str] = {}
        if ctx.frames:
            sym, masked = self._resolve_video(ctx.frames)
            if masked:
                obs["v_masked"] = self.spec.v_mask[sym]
            else:
                obs["v"] = sym
        for block in ctx.text_blocks:
            if block in self.spec.t_symbols:
                obs["t"] = block
            elif block in self._masked_t_values:
                obs["t_masked"] = block
            # Other blocks (instructions, questions, options) are constants.
        return obs

    # -- Provider interface ----------------------------------------------

    def score_target(self, ctx: ScoringContext, target: str) -> TokenLogProbs:
        if not target:
            raise ValueError("target must be nonempty")
        is_t = target in self.spec.t_symbols
        is_y = target in self.spec.y_symbols
        if is_t and is_y:
            raise ProviderError(f"target {target!r} ambiguous between T and Y symbols")
        if not (is_t or is_y):
            raise ProviderError(f"target {target!r} unknown to joint spec")
        obs = self._observations(ctx)
        if is_t:
            obs.pop("t", None)  # scoring T replaces any observed T block
            p = self.spec.conditional("t", target, obs)
        else:
            p = self.spec.conditional("y", target, obs)
        logprob = math.log(p) if p > 0 else float("-inf")
        return TokenLogProbs(tokens=((target, logprob),), total=logprob)

    def sample_candidates(
        self,
        ctx: ScoringContext,
        k: int,
        temperatures: Sequence[float],
        *,
        id_prefix: str = "cand",
    ) -> list[SummaryCandidate]:
        self._check_sampling_args(k, temperatures)
        obs = self._observations(ctx)
        obs.pop("t", None)
        probs = [self.spec.conditional("t", t, obs) for t in self.spec.t_symbols]
        if not any(p > 0 for p in probs):
            raise ProviderError("no summary has positive probability in this context")
        ctx_key = canonical_json(context_to_dict(ctx))
        out = []
        for i, temp in enumerate(temperatures):
            text = self._draw(probs, temp, ctx_key, i)
            out.append(
                SummaryCandidate(
                    candidate_id=f"{id_prefix}-{i:02d}",
                    text=text,
                    temperature=float(temp),
                    source="sampled",
                )
            )
        return out

    def _draw(self, probs: Sequence[float], temperature: float, ctx_key: str, call: int) -> str:
        if temperature < 0:
            raise ValueError("temperature must be >= 0")
        if temperature == 0:
            best = max(range(len(probs)), key=lambda i: (probs[i], -i))
            return self.spec.t_symbols[best]
        weights = [p ** (1.0 / temperature) if p > 0 else 0.0 for p in probs]
        total = sum(weights)
        msg = f"gen:{self.seed}:{call}:{ctx_key}".encode("utf-8")
        u = int.from_bytes(hashlib.sha256(msg).digest()[:8], "big") / 2.0**64
        cum = 0.0
        for i, w in enumerate(weights):
            cum += w / total
            if u < cum:
                return self.spec.t_symbols[i]
        return self.spec.t_symbols[len(probs) - 1]
