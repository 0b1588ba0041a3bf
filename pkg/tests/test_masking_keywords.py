from __future__ import annotations

import math
import random
import re

import pytest

from vidscore.ingest import PRESETS
from vidscore.masking import TfidfConfig, extract_keywords, keywords_to_csv


def oracle_tfidf(corpus, ngram_min, ngram_max, doc_freq_cutoff, score_threshold):
    """Brute-force reference: enumerate every n-gram and score it directly.

    Deliberately independent of the production code, including its own
    normalization (punctuation to spaces, lowercase, whitespace split).
    """

    def norm_tokens(doc):
        return re.sub(r"[\W_]+", " ", doc.lower()).split()

    docs = [norm_tokens(d) for d in corpus]
    n_docs = len(docs)
    results = {}
    for order in range(ngram_min, ngram_max + 1):
        grams_per_doc = []
        for tokens in docs:
            grams = [
                " ".join(tokens[i : i + order])
                for i in range(len(tokens) - order + 1)
            ]
            grams_per_doc.append(grams)
        vocabulary = set(g for grams in grams_per_doc for g in grams)
        for term in vocabulary:
            df = sum(1 for grams in grams_per_doc if term in grams)
            if df / n_docs > doc_freq_cutoff:
                continue
            idf = math.log((1 + n_docs) / (1 + df)) + 1.0
            score = 0.0
            for grams in grams_per_doc:
                if grams:
                    score = max(score, grams.count(term) / len(grams) * idf)
            if score >= score_threshold:
                results[term] = score
    return results


TOY_CORPUS = [
    "the robot arm lifts a crate",
    "the robot arm drops the crate, slowly",
    "a drone films the robot from above",
]


def test_toy_corpus_matches_brute_force_oracle():
    config = TfidfConfig(ngram_min=1, ngram_max=3, doc_freq_cutoff=0.5, score_threshold=0.0)
    ks = extract_keywords(TOY_CORPUS, config)
    expected = oracle_tfidf(TOY_CORPUS, 1, 3, 0.5, 0.0)
    produced = dict(ks.terms)
    assert set(produced) == set(expected)
    for term, score in expected.items():
        assert produced[term] == pytest.approx(score, abs=1e-12)


def test_term_in_every_document_is_cut():
    # "robot" appears in 3/3 docs; cutoff 0.5 discards it.
    config = TfidfConfig(doc_freq_cutoff=0.5)
    ks = extract_keywords(TOY_CORPUS, config)
    assert "robot" not in dict(ks.terms)
    assert "drone" in dict(ks.terms)


def test_cutoff_boundary_is_exclusive():
    # df fraction exactly equal to the cutoff is kept ("exceeds" discards).
    corpus = ["apple pie", "apple tart", "plum cake", "plum jam"]
    ks = extract_keywords(corpus, TfidfConfig(ngram_max=1, doc_freq_cutoff=0.5))
    assert "apple" in dict(ks.terms)


def test_empty_corpus_errors():
    with pytest.raises(ValueError, match="empty corpus"):
        extract_keywords([], TfidfConfig())


def test_threshold_can_exclude_everything():
    ks = extract_keywords(TOY_CORPUS, TfidfConfig(score_threshold=1e9))
    assert ks.terms == ()


def test_learningpaper_preset_accepts_and_extracts():
    preset = PRESETS["learningpaper24"]
    assert preset.tfidf.doc_freq_cutoff == 0.10
    assert preset.tfidf.score_threshold == 0.0025
    assert (preset.tfidf.ngram_min, preset.tfidf.ngram_max) == (1, 3)
    corpus = [f"unique{i} talk about reinforcement learning topic{i}" for i in range(12)]
    ks = extract_keywords(corpus, preset.tfidf)
    produced = dict(ks.terms)
    assert "unique3" in produced
    # "talk" is in every response, well over the 10% cutoff.
    assert "talk" not in produced


def test_dataset_preset_thresholds_match_reported_settings():
    assert PRESETS["sutd-trafficqa"].tfidf.doc_freq_cutoff == 0.30
    assert PRESETS["sutd-trafficqa"].tfidf.score_threshold == 0.01
    assert PRESETS["longvideobench"].tfidf.doc_freq_cutoff == 0.50
    assert PRESETS["longvideobench"].tfidf.score_threshold == 0.006


def test_determinism():
    config = TfidfConfig(doc_freq_cutoff=0.8)
    a = extract_keywords(TOY_CORPUS, config)
    b = extract_keywords(TOY_CORPUS, config)
    assert a == b
    assert a.keyword_set_id == b.keyword_set_id


def test_fingerprint_tracks_corpus():
    config = TfidfConfig()
    a = extract_keywords(TOY_CORPUS, config)
    b = extract_keywords(TOY_CORPUS[:-1], config)
    assert a.corpus_fingerprint != b.corpus_fingerprint


def test_extra_keywords_joined_and_floored():
    config = TfidfConfig(
        ngram_max=1, doc_freq_cutoff=0.5, score_threshold=0.05,
        extra_keywords=("Partial Observability", "drone"),
    )
    ks = extract_keywords(TOY_CORPUS, config)
    produced = dict(ks.terms)
    # Normalized multi-word extra lands even though it never occurs in corpus.
    assert "partial observability" in produced
    assert produced["partial observability"] >= 0.05
    assert "drone" in produced


def test_extra_keywords_respect_cutoff():
    config = TfidfConfig(ngram_max=1, doc_freq_cutoff=0.5, extra_keywords=("robot",))
    ks = extract_keywords(TOY_CORPUS, config)
    assert "robot" not in dict(ks.terms)


def test_invariant_scores_meet_threshold_and_cutoff():
    rng = random.Random(5)
    vocab = ["red", "blue", "truck", "sign", "walks", "fast", "slow", "stops"]
    for _ in range(20):
        corpus = [
            " ".join(rng.choice(vocab) for _ in range(rng.randint(3, 20)))
            for _ in range(rng.randint(1, 5))
        ]
        config = TfidfConfig(
            ngram_max=2,
            doc_freq_cutoff=rng.choice([0.34, 0.5, 1.0]),
            score_threshold=rng.choice([0.0, 0.05, 0.2]),
        )
        ks = extract_keywords(corpus, config)
        for (term, score), df in zip(ks.terms, ks.doc_freq):
            assert score >= config.score_threshold
            assert df <= config.doc_freq_cutoff + 1e-12


def test_csv_export_columns():
    ks = extract_keywords(TOY_CORPUS, TfidfConfig(doc_freq_cutoff=0.5))
    csv = keywords_to_csv(ks)
    lines = csv.strip().split("\n")
    assert lines[0] == "ngram,score,doc_freq"
    assert len(lines) == len(ks.terms) + 1
