"""Corpus tf-idf n-gram keyword extraction.

Scoring scheme: for an n-gram t and document d,
    tf(t, d)  = count(t, d) / (total n-grams of the same order in d)
    idf(t)    = ln((1 + N) / (1 + df(t))) + 1
    score(t)  = max over documents of tf(t, d) * idf(t)
Terms whose document frequency exceeds ``doc_freq_cutoff`` (as a fraction of
documents) are discarded before thresholding.
"""

from __future__ import annotations

import hashlib
import io
import math
from collections import Counter
from dataclasses import dataclass
from typing import Sequence

from vidscore.domain import canonical_json
from vidscore.masking.tokens import tokenize


@dataclass(frozen=True)
class TfidfConfig:
    ngram_min: int = 1
    ngram_max: int = 3
    doc_freq_cutoff: float = 1.0
    score_threshold: float = 0.0
    extra_keywords: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if not 1 <= self.ngram_min <= self.ngram_max:
            raise ValueError("need 1 <= ngram_min <= ngram_max")
        if not 0 < self.doc_freq_cutoff <= 1:
            raise ValueError("doc_freq_cutoff must be in (0, 1]")
        if self.score_threshold < 0:
            raise ValueError("score_threshold must be >= 0")
        object.__setattr__(self, "extra_keywords", tuple(self.extra_keywords))


@dataclass(frozen=True)
class KeywordSet:
    """Extracted n-gram keywords with their corpus scores.

    ``terms`` pairs each space-joined n-gram with its corpus score;
    ``doc_freq`` carries the matching document-frequency fraction for export.
    """

    keyword_set_id: str
    terms: tuple[tuple[str, float], ...]
    corpus_fingerprint: str
    doc_freq: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "terms", tuple((str(t), float(s)) for t, s in self.terms))
        object.__setattr__(self, "doc_freq", tuple(float(f) for f in self.doc_freq))

    @property
    def ngrams(self) -> tuple[str, ...]:
        return tuple(term for term, _ in self.terms)


def _ngram_counts(tokens: Sequence[str], order: int) -> Counter[str]:
    return Counter(
        " ".join(tokens[i : i + order]) for i in range(len(tokens) - order + 1)
    )


def corpus_fingerprint(corpus: Sequence[str]) -> str:
    return hashlib.sha256(canonical_json(list(corpus)).encode("utf-8")).hexdigest()


def extract_keywords(corpus: Sequence[str], config: TfidfConfig) -> KeywordSet:
    """Deterministic keyword extraction over a document corpus.

    Raises ``ValueError`` on an empty corpus.  A threshold that excludes every
    term yields an empty (still valid) KeywordSet.
    """

    if not corpus:
        raise ValueError("empty corpus")
    n_docs = len(corpus)
    doc_tokens = [tokenize(doc) for doc in corpus]

    scores: dict[str, float] = {}
    dfs: dict[str, int] = {}
    for order in range(config.ngram_min, config.ngram_max + 1):
        per_doc = [_ngram_counts(tokens, order) for tokens in doc_tokens]
        df: Counter[str] = Counter()
        for counts in per_doc:
            df.update(counts.keys())
        for term, term_df in df.items():
            if term_df / n_docs > config.doc_freq_cutoff:
                continue
            idf = math.log((1 + n_docs) / (1 + term_df)) + 1.0
            best = 0.0
            for counts in per_doc:
                count = counts.get(term)
                if not count:
                    continue
                total = sum(counts.values())
                best = max(best, count / total * idf)
            if best >= config.score_threshold:
                scores[term] = best
                dfs[term] = term_df

    # Author-provided extras join the set after the same normalization and
    # document-frequency filter; scores are floored at the threshold so the
    # "score >= threshold" invariant holds for hand-supplied terms too.
    for raw in config.extra_keywords:
        term = " ".join(tokenize(raw))
        if not term:
            continue
        term_df = sum(1 for tokens in doc_tokens if _contains_seq(tokens, term.split()))
        if term_df / n_docs > config.doc_freq_cutoff:
            continue
        existing = scores.get(term, 0.0)
        scores[term] = max(existing, config.score_threshold)
        dfs.setdefault(term, term_df)

    ordered = sorted(scores.items(), key=lambda kv: (-kv[1], kv[0]))
    fingerprint = corpus_fingerprint(corpus)
    config_key = canonical_json(
        {
            "ngram_min": config.ngram_min,
            "ngram_max": config.ngram_max,
            "doc_freq_cutoff": config.doc_freq_cutoff,
            "score_threshold": config.score_threshold,
            "extra_keywords": sorted(config.extra_keywords),
        }
    )
    set_id = "kw-" + hashlib.sha256((fingerprint + config_key).encode("utf-8")).hexdigest()[:16]
    return KeywordSet(
        keyword_set_id=set_id,
        terms=tuple(ordered),
        corpus_fingerprint=fingerprint,
        doc_freq=tuple(dfs[term] / n_docs for term, _ in ordered),
    )


def _contains_seq(tokens: Sequence[str], seq: Sequence[str]) -> bool:
    n = len(seq)
    if n == 0 or n > len(tokens):
        return False
    target = tuple(seq)
    return any(tuple(tokens[i : i + n]) == target for i in range(len(tokens) - n + 1))


def keywords_to_csv(keywords: KeywordSet) -> str:
    """CSV export with columns (ngram, score, doc_freq)."""

    buf = io.StringIO()
    buf.write("ngram,score,doc_freq\n")
    freqs = keywords.doc_freq or tuple(float("nan") for _ in keywords.terms)
    for (term, score), freq in zip(keywords.terms, freqs):
        quoted = '"' + term.replace('"', '""') + '"' if "," in term else term
        buf.write(f"{quoted},{score!r},{freq!r}\n")
    return buf.getvalue()
