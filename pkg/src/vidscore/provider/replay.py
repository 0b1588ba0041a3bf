"""Record/replay fixture transport.

Recording wraps any provider and writes one JSON fixture per request, keyed
by the request hash; replay serves only from those fixtures.  An unseen
request during replay is a hard error -- there is no silent live fallback --
so replayed runs are fully offline and byte-reproducible.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Sequence

from vidscore.domain import SummaryCandidate, candidate_from_dict, candidate_to_dict, canonical_json
from vidscore.provider.base import (
    Provider,
    ReplayMissError,
    ScoringContext,
    TokenLogProbs,
    context_to_dict,
    request_key,
)

_META_FILE = "provider.json"


class RecordingProvider(Provider):
    def __init__(self, inner: Provider, fixture_dir: str | Path) -> None:
        self.inner = inner
        self.fixture_dir = Path(fixture_dir)
        self.fixture_dir.mkdir(parents=True, exist_ok=True)
        self.provider_id = inner.provider_id
        (self.fixture_dir / _META_FILE).write_text(
            canonical_json({"provider_id": self.provider_id}) + "\n", encoding="utf-8"
        )

    def _write(self, key: str, op: str, request: dict, response: object) -> None:
        record = {"op": op, "request": request, "response": response}
        path = self.fixture_dir / f"{key}.json"
        path.write_text(canonical_json(record) + "\n", encoding="utf-8")

    def score_target(self, ctx: ScoringContext, target: str) -> TokenLogProbs:
        key = request_key("score_target", ctx, target)
        result = self.inner.score_target(ctx, target)
        self._write(
            key,
            "score_target",
            {"ctx": context_to_dict(ctx), "target": target},
            result.to_dict(),
        )
        return result

    def sample_candidates(
        self,
        ctx: ScoringContext,
        k: int,
        temperatures: Sequence[float],
        *,
        id_prefix: str = "cand",
    ) -> list[SummaryCandidate]:
        payload = {"k": k, "temperatures": list(temperatures), "id_prefix": id_prefix}
        key = request_key("sample_candidates", ctx, payload)
        result = self.inner.sample_candidates(ctx, k, temperatures, id_prefix=id_prefix)
        self._write(
            key,
            "sample_candidates",
            {"ctx": context_to_dict(ctx), **payload},
            [candidate_to_dict(c) for c in result],
        )
        return result


class ReplayProvider(Provider):
    def __init__(self, fixture_dir: str | Path) -> None:
        self.fixture_dir = Path(fixture_dir)
        meta_path = self.fixture_dir / _META_FILE
        if meta_path.is_file():
            meta = json.loads(meta_path.read_text(encoding="utf-8"))
            self.provider_id = str(meta.get("provider_id", "replay"))
        else:
            self.provider_id = "replay"

    def _read(self, key: str) -> dict:
        path = self.fixture_dir / f"{key}.json"
        if not path.is_file():
            raise ReplayMissError(f"no recorded fixture for request {key}")
        return json.loads(path.read_text(encoding="utf-8"))

    def score_target(self, ctx: ScoringContext, target: str) -> TokenLogProbs:
        record = self._read(request_key("score_target", ctx, target))
        return TokenLogProbs.from_dict(record["response"])

    def sample_candidates(
        self,
        ctx: ScoringContext,
        k: int,
        temperatures: Sequence[float],
        *,
        id_prefix: str = "cand",
    ) -> list[SummaryCandidate]:
        payload = {"k": k, "temperatures": list(temperatures), "id_prefix": id_prefix}
        record = self._read(request_key("sample_candidates", ctx, payload))
        return [candidate_from_dict(d) for d in record["response"]]
