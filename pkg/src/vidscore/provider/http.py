"""Live provider for OpenAI-compatible completions endpoints.

Teacher-forced scoring requires the completions wire format with
echo-and-logprobs: the full prompt+target is submitted with ``max_tokens=0``
and the per-token logprobs of the target region are read back from the
echoed prompt.  Chat-style endpoints without prompt-logprob echo are
rejected at capability-probe time, since they cannot return probabilities of
a *given* string.
"""

from __future__ import annotations

import time
from typing import Any, Mapping, Sequence

import requests

from vidscore.domain import SummaryCandidate
from vidscore.provider.base import (
    EchoScoringUnsupportedError,
    GenerationUnavailableError,
    Provider,
    ProviderError,
    ScoringContext,
    TokenLogProbs,
    TransportError,
)
from vidscore.provider.templates import get_template, render

_RETRYABLE_STATUS = {429, 500, 502, 503, 504}


class CompletionsProvider(Provider):
    def __init__(
        self,
        endpoint: str,
        model: str,
        api_key: str | None = None,
        *,
        max_retries: int = 3,
        backoff_s: float = 0.5,
        timeout_s: float = 120.0,
        max_generation_tokens: int = 256,
        template_dir: str | None = None,
        session: requests.Session | None = None,
    ) -> None:
        self.endpoint = endpoint.rstrip("/")
        self.model = model
        self.api_key = api_key
        self.max_retries = max_retries
        self.backoff_s = backoff_s
        self.timeout_s = timeout_s
        self.max_generation_tokens = max_generation_tokens
        self.template_dir = template_dir
        self.session = session or requests.Session()
        self.provider_id = f"live:{model}"
        self._echo_capable: bool | None = None

    # -- transport ---------------------------------------------------------

    def _headers(self) -> dict[str, str]:
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        return headers

    def _post(self, body: Mapping[str, Any]) -> dict[str, Any]:
        url = f"{self.endpoint}/completions"
        last_error: Exception | None = None
        for attempt in range(self.max_retries + 1):
            if attempt:
                time.sleep(self.backoff_s * 2 ** (attempt - 1))
            try:
                resp = self.session.post(
                    url, json=dict(body), headers=self._headers(), timeout=self.timeout_s
                )
            except (requests.ConnectionError, requests.Timeout) as exc:
                last_error = exc
                continue
            if resp.status_code in _RETRYABLE_STATUS:
                last_error = TransportError(f"HTTP {resp.status_code} from {url}")
                continue
            if resp.status_code >= 400:
                raise ProviderError(f"HTTP {resp.status_code} from {url}: {resp.text[:500]}")
            return resp.json()
        raise TransportError(f"request to {url} failed after retries: {last_error}")

    # -- capability probe ----------------------------------------------------

    def probe_echo_capability(self) -> None:
        """Verify the endpoint echoes prompt logprobs; raise if it cannot."""

        if self._echo_capable:
            return
        try:
            data = self._post(
                {
                    "model": self.model,
                    "prompt": "capability probe",
                    "max_tokens": 0,
                    "echo": True,
                    "logprobs": 0,
                    "temperature": 0,
                }
            )
            choice = data["choices"][0]
            logprobs = choice["logprobs"]
            _ = logprobs["tokens"], logprobs["token_logprobs"], logprobs["text_offset"]
        except TransportError:
            raise
        except Exception as exc:
            raise EchoScoringUnsupportedError(f"echo scoring unsupported: {exc}") from exc
        self._echo_capable = True

    # -- Provider interface ----------------------------------------------

    def score_target(self, ctx: ScoringContext, target: str) -> TokenLogProbs:
        if not target:
            raise ValueError("target must be nonempty")
        self.probe_echo_capability()
        template = get_template(ctx.template_id, self.template_dir)
        prompt = render(template, ctx)
        data = self._post(
            {
                "model": self.model,
                "prompt": prompt + target,
                "max_tokens": 0,
                "echo": True,
                "logprobs": 0,
                "temperature": 0,
            }
        )
        try:
            lp = data["choices"][0]["logprobs"]
            tokens: Sequence[str] = lp["tokens"]
            token_logprobs: Sequence[float | None] = lp["token_logprobs"]
            offsets: Sequence[int] = lp["text_offset"]
        except (KeyError, IndexError, TypeError) as exc:
            raise EchoScoringUnsupportedError(f"echo scoring unsupported: {exc}") from exc
        # Prompts end with a newline, so the tokenizer does not merge prompt
        # and target characters into one token at the boundary.
        boundary = len(prompt)
        pairs = [
            (tok, float(logprob))
            for tok, logprob, off in zip(tokens, token_logprobs, offsets)
            if off >= boundary and logprob is not None
        ]
        if not pairs:
            raise ProviderError(f"no target tokens returned for {target!r}")
        return TokenLogProbs.from_pairs(pairs)

    def sample_candidates(
        self,
        ctx: ScoringContext,
        k: int,
        temperatures: Sequence[float],
        *,
        id_prefix: str = "cand",
    ) -> list[SummaryCandidate]:
        self._check_sampling_args(k, temperatures)
        template = get_template(ctx.template_id, self.template_dir)
        prompt = render(template, ctx)
        out = []
        for i, temp in enumerate(temperatures):
            try:
                data = self._post(
                    {
                        "model": self.model,
                        "prompt": prompt,
                        "max_tokens": self.max_generation_tokens,
                        "temperature": float(temp),
                        "n": 1,
                    }
                )
                text = data["choices"][0]["text"].strip()
            except ProviderError as exc:
                raise GenerationUnavailableError(f"generation call {i} failed: {exc}") from exc
            if not text:
                raise GenerationUnavailableError(f"generation call {i} returned empty text")
            out.append(
                SummaryCandidate(
                    candidate_id=f"{id_prefix}-{i:02d}",
                    text=text,
                    temperature=float(temp),
                    source="sampled",
                )
            )
        return out
