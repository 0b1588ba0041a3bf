"""Uniform teacher-forced logprob access to VLMs: live HTTP, mock, replay."""

from vidscore.provider.base import (
    EchoScoringUnsupportedError,
    GenerationUnavailableError,
    Provider,
    ProviderError,
    ReplayMissError,
    ScoringContext,
    TokenLogProbs,
    TransportError,
    request_key,
)
from vidscore.provider.http import CompletionsProvider
from vidscore.provider.mock import JointSpec, MockProvider
from vidscore.provider.replay import RecordingProvider, ReplayProvider
from vidscore.provider.templates import Template, TemplateSet, get_template, render

__all__ = [
    "EchoScoringUnsupportedError",
    "GenerationUnavailableError",
    "Provider",
    "ProviderError",
    "ReplayMissError",
    "ScoringContext",
    "TokenLogProbs",
    "TransportError",
    "request_key",
    "CompletionsProvider",
    "JointSpec",
    "MockProvider",
    "RecordingProvider",
    "ReplayProvider",
    "Template",
    "TemplateSet",
    "get_template",
    "render",
]
