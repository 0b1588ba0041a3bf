from __future__ import annotations

import json

import pytest
import requests

from vidscore.provider import (
    CompletionsProvider,
    EchoScoringUnsupportedError,
    ProviderError,
    ScoringContext,
    TransportError,
    get_template,
    render,
)
from vidscore.provider.templates import DEFAULT_TEMPLATES


class FakeResponse:
    def __init__(self, status_code=200, payload=None, text=""):
        self.status_code = status_code
        self._payload = payload or {}
        self.text = text or json.dumps(self._payload)

    def json(self):
        return self._payload


class FakeSession:
    """Scripted stand-in for requests.Session; replays a queue of outcomes."""

    def __init__(self, outcomes):
        self.outcomes = list(outcomes)
        self.requests = []

    def post(self, url, json=None, headers=None, timeout=None):
        self.requests.append({"url": url, "body": json, "headers": headers})
        outcome = self.outcomes.pop(0)
        if isinstance(outcome, Exception):
            raise outcome
        return outcome


def echo_response(prompt: str, target_tokens):
    """Completions-style echo payload: one coarse prompt token + target tokens."""

    tokens = [prompt]
    logprobs = [None]
    offsets = [0]
    cursor = len(prompt)
    for tok, lp in target_tokens:
        tokens.append(tok)
        logprobs.append(lp)
        offsets.append(cursor)
        cursor += len(tok)
    return FakeResponse(
        payload={
            "choices": [
                {
                    "text": prompt,
                    "logprobs": {
                        "tokens": tokens,
                        "token_logprobs": logprobs,
                        "text_offset": offsets,
                    },
                }
            ]
        }
    )


def make_provider(outcomes, **kwargs):
    session = FakeSession(outcomes)
    provider = CompletionsProvider(
        "http://fake.test/v1", "test-model", "sk-secret",
        session=session, backoff_s=0.0, **kwargs,
    )
    return provider, session


def probe_ok():
    return echo_response("capability probe", [])


def scoring_ctx():
    return ScoringContext(
        text_blocks=("a <MASK> masked block",),
        template_id=DEFAULT_TEMPLATES.grounding_text_only,
    )


def test_score_target_reads_target_region_logprobs():
    ctx = scoring_ctx()
    prompt = render(get_template(ctx.template_id), ctx)
    outcomes = [probe_ok(), echo_response(prompt, [("hello", -0.5), (" world", -1.25)])]
    provider, session = make_provider(outcomes)
    result = provider.score_target(ctx, "hello world")
    assert result.total == pytest.approx(-1.75)
    assert [t for t, _ in result.tokens] == ["hello", " world"]
    body = session.requests[-1]["body"]
    assert body["echo"] is True
    assert body["max_tokens"] == 0
    assert body["logprobs"] == 0
    assert body["prompt"] == prompt + "hello world"
    assert session.requests[-1]["headers"]["Authorization"] == "Bearer sk-secret"


def test_capability_probe_rejects_endpoints_without_echo():
    # Chat-style endpoint: responds but without prompt logprob echo fields.
    outcomes = [FakeResponse(payload={"choices": [{"message": {"content": "hi"}}]})]
    provider, _ = make_provider(outcomes)
    with pytest.raises(EchoScoringUnsupportedError, match="echo scoring unsupported"):
        provider.score_target(scoring_ctx(), "hello")


def test_retry_then_success_is_at_most_once():
    ctx = scoring_ctx()
    prompt = render(get_template(ctx.template_id), ctx)
    outcomes = [
        probe_ok(),
        FakeResponse(status_code=503),
        requests.ConnectionError("boom"),
        echo_response(prompt, [("ok", -0.25)]),
    ]
    provider, session = make_provider(outcomes)
    result = provider.score_target(ctx, "ok")
    assert result.total == pytest.approx(-0.25)
    # Probe + 2 failures + 1 success; nothing reissued after success.
    assert len(session.requests) == 4


def test_client_error_is_not_retried():
    outcomes = [probe_ok(), FakeResponse(status_code=422, text="bad request")]
    provider, session = make_provider(outcomes)
    with pytest.raises(ProviderError, match="HTTP 422"):
        provider.score_target(scoring_ctx(), "ok")
    assert len(session.requests) == 2


def test_transport_error_after_bounded_retries():
    outcomes = [probe_ok()] + [FakeResponse(status_code=503)] * 4
    provider, session = make_provider(outcomes, max_retries=3)
    with pytest.raises(TransportError, match="after retries"):
        provider.score_target(scoring_ctx(), "ok")
    assert len(session.requests) == 5  # probe + initial + 3 retries


def test_sample_candidates_one_call_per_temperature():
    gen = FakeResponse(payload={"choices": [{"text": "  a tidy summary  "}]})
    outcomes = [gen, gen, gen]
    provider, session = make_provider(outcomes)
    ctx = ScoringContext(
        text_blocks=("Write one concise summary.",),
        frames=("f0.png",),
        template_id=DEFAULT_TEMPLATES.generation,
    )
    candidates = provider.sample_candidates(ctx, 3, [1.0, 0.7, 0.3], id_prefix="vid-s")
    assert [c.text for c in candidates] == ["a tidy summary"] * 3
    assert [c.temperature for c in candidates] == [1.0, 0.7, 0.3]
    assert [r["body"]["temperature"] for r in session.requests] == [1.0, 0.7, 0.3]
    assert all(r["body"]["max_tokens"] > 0 for r in session.requests)
