"""Shared text normalization for keyword extraction and masking.

Normalization is: lowercase, punctuation treated as a separator, split on the
resulting boundaries.  Punctuation-as-separator (rather than deletion) means
hyphenated compounds split into their parts, so "human-machine" yields the
two tokens "human" and "machine".
"""

from __future__ import annotations

import re
from typing import NamedTuple

# Maximal runs of letters/digits; underscores and all punctuation separate.
_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)


class Token(NamedTuple):
    norm: str
    start: int
    end: int


def tokenize_with_spans(text: str) -> list[Token]:
    """Normalized tokens with their character spans in the original text."""

    return [Token(m.group().lower(), m.start(), m.end()) for m in _TOKEN_RE.finditer(text)]


def tokenize(text: str) -> list[str]:
    return [m.group().lower() for m in _TOKEN_RE.finditer(text)]
