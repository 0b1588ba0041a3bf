"""Keyword masking of summary text.

Replacement is longest-match-first: all candidate matches are ranked by
(longer n-gram, then earlier start) and accepted greedily without overlap,
so "partial observability" beats "partial" wherever both could apply.
Each accepted span is replaced by exactly one mask token.
"""

from __future__ import annotations

from vidscore.domain import MASK_TOKEN, MaskedText
from vidscore.masking.keywords import KeywordSet
from vidscore.masking.tokens import Token, tokenize_with_spans


class MaskTokenError(ValueError):
    """Raised when the reserved mask token appears in raw input text."""


def _protected_spans(text: str) -> list[tuple[int, int]]:
    spans = []
    start = 0
    while True:
        i = text.find(MASK_TOKEN, start)
        if i < 0:
            return spans
        spans.append((i, i + len(MASK_TOKEN)))
        start = i + len(MASK_TOKEN)


def _matchable_tokens(text: str, allow_existing_masks: bool) -> list[Token]:
    """Tokens of ``text``; tokens inside existing mask literals become barriers.

    A barrier token (norm ``None``) can never match a keyword and breaks
    n-gram adjacency, so keywords cannot match across a mask boundary.
    """

    protected = _protected_spans(text) if allow_existing_masks else []
    tokens = tokenize_with_spans(text)
    if not protected:
        return tokens
    out = []
    for tok in tokens:
        shielded = any(tok.start < e and tok.end > s for s, e in protected)
        out.append(Token(None, tok.start, tok.end) if shielded else tok)  # type: ignore[arg-type]
    return out


def _find_matches(
    tokens: list[Token], keyword_tokens: list[tuple[str, ...]]
) -> list[tuple[int, int]]:
    """All (start_token, n_tokens) keyword occurrences in the token stream."""

    by_len: dict[int, set[tuple[str, ...]]] = {}
    for kw in keyword_tokens:
        by_len.setdefault(len(kw), set()).add(kw)
    norms = [t.norm for t in tokens]
    matches = []
    for n, kws in by_len.items():
        for i in range(len(norms) - n + 1):
            window = tuple(norms[i : i + n])
            if None not in window and window in kws:
                matches.append((i, n))
    return matches


def mask_text(
    text: str, keywords: KeywordSet, *, allow_existing_masks: bool = False
) -> MaskedText:
    """Replace keyword n-grams in ``text`` with the mask token.

    ``allow_existing_masks`` permits re-masking already-masked text (mask
    literals pass through untouched); by default the reserved token in input
    raises ``MaskTokenError``.
    """

    if not text:
        raise ValueError("text must be nonempty")
    if not allow_existing_masks and MASK_TOKEN in text:
        raise MaskTokenError(f"reserved token {MASK_TOKEN!r} present in input")

    tokens = _matchable_tokens(text, allow_existing_masks)
    keyword_tokens = [tuple(term.split(" ")) for term in keywords.ngrams]
    matches = _find_matches(tokens, keyword_tokens)
    # Longer n-grams first, then earlier start.
    matches.sort(key=lambda m: (-m[1], m[0]))

    claimed: set[int] = set()
    accepted: list[tuple[int, int]] = []
    for start, n in matches:
        span = range(start, start + n)
        if any(i in claimed for i in span):
            continue
        claimed.update(span)
        accepted.append((start, n))
    accepted.sort()

    pieces: list[str] = []
    spans: list[tuple[int, int, str]] = []
    cursor = 0
    offset = 0
    for start, n in accepted:
        s, e = tokens[start].start, tokens[start + n - 1].end
        pieces.append(text[cursor:s])
        offset += s - cursor
        spans.append((offset, offset + len(MASK_TOKEN), text[s:e]))
        pieces.append(MASK_TOKEN)
        offset += len(MASK_TOKEN)
        cursor = e
    pieces.append(text[cursor:])
    masked = "".join(pieces)

    result = MaskedText(
        text=masked, masked_spans=tuple(spans), keyword_set_id=keywords.keyword_set_id
    )
    if contains_keyword(result.text, keywords):
        raise AssertionError("keyword survived masking; tokenizer/matcher out of sync")
    return result


def contains_keyword(text: str, keywords: KeywordSet) -> bool:
    """True if any keyword n-gram occurs in ``text`` outside mask literals."""

    tokens = _matchable_tokens(text, allow_existing_masks=True)
    keyword_tokens = [tuple(term.split(" ")) for term in keywords.ngrams]
    return bool(_find_matches(tokens, keyword_tokens))
