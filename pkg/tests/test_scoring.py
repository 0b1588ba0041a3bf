from __future__ import annotations

import math
import random

import pytest

from vidscore.domain import (
    MaskedText,
    SummaryCandidate,
    TaskInstance,
    VideoManifest,
    canonical_json,
    scorecard_to_dict,
    validate_scorecard,
)
from vidscore.masking import plan_video_mask
from vidscore.provider import (
    JointSpec,
    MockProvider,
    ProviderError,
    RecordingProvider,
    ReplayProvider,
)
from vidscore.scoring import (
    ScoringJob,
    cards_to_csv_extended,
    grounding_score,
    ledger_dump,
    masked_frame_refs,
    per_token_average,
    score_all,
    utility_score,
)

TMASK = "__tmask__"  # the constant-mask symbol of JointSpec.with_constant_masks


def manifest(v_symbols=("v0",)):
    return VideoManifest(
        video_id="vid",
        frame_paths=tuple(v_symbols),
        frame_count=len(v_symbols),
        duration_s=1.0,
    )


def candidate(text, cid="c0"):
    return SummaryCandidate(candidate_id=cid, text=text, temperature=1.0)


def masked(text=TMASK):
    return MaskedText(text=text, masked_spans=(), keyword_set_id="kw")


def task(truth="A", labels=("A", "B")):
    return TaskInstance(
        question="which?",
        options=tuple((l, f"option {l}") for l in labels),
        truth_label=truth,
    )


def test_grounding_zero_when_video_ignored():
    # T independent of V: both conditionals coincide and cancel exactly.
    spec = JointSpec.with_constant_masks(
        v_symbols=["v0", "v1"],
        t_symbols=["t0", "t1"],
        y_symbols=["y0"],
        table=[0.5 * 0.3, 0.5 * 0.7, 0.5 * 0.3, 0.5 * 0.7],
    )
    provider = MockProvider(spec)
    score, _, _ = grounding_score(candidate("t0"), manifest(), masked(), provider)
    assert score == pytest.approx(0.0, abs=1e-9)


def test_grounding_ln4_when_video_pins_summary():
    # P(T|V, masked) = 1 while P(T|masked) = 0.25.
    n = 4
    table = []
    for iv in range(n):
        for it in range(n):
            table.append(0.25 if iv == it else 0.0)
    spec = JointSpec.with_constant_masks(
        v_symbols=[f"v{i}" for i in range(n)],
        t_symbols=[f"t{i}" for i in range(n)],
        y_symbols=["y0"],
        table=table,
    )
    provider = MockProvider(spec)
    score, with_video, text_only = grounding_score(
        candidate("t0"), manifest(("v0",)), masked(), provider
    )
    assert score == pytest.approx(math.log(4.0), abs=1e-9)
    assert with_video.total == pytest.approx(0.0, abs=1e-12)
    assert text_only.total == pytest.approx(math.log(0.25), abs=1e-12)


def test_utility_zero_when_summary_ignored():
    spec = JointSpec.with_constant_masks(
        v_symbols=["v0"],
        t_symbols=["t0", "t1"],
        y_symbols=["A", "B"],
        table=[0.5 * 0.6, 0.5 * 0.4, 0.5 * 0.6, 0.5 * 0.4],
    )
    provider = MockProvider(spec)
    score, _, _ = utility_score(candidate("t0"), ("v0#masked",), task(), provider)
    assert score == pytest.approx(0.0, abs=1e-9)


def test_utility_ln3():
    # P(Y|T, V_masked) = 0.9 against P(Y|V_masked) = 0.3.
    spec = JointSpec.with_constant_masks(
        v_symbols=["v0"],
        t_symbols=["t0", "t1"],
        y_symbols=["A", "B"],
        table=[0.25 * 0.9, 0.25 * 0.1, 0.75 * 0.1, 0.75 * 0.9],
    )
    provider = MockProvider(spec)
    score, with_summary, without = utility_score(
        candidate("t0"), ("v0#masked",), task(), provider
    )
    assert score == pytest.approx(math.log(3.0), abs=1e-9)
    assert with_summary.total == pytest.approx(math.log(0.9), abs=1e-12)
    assert without.total == pytest.approx(math.log(0.3), abs=1e-12)


def random_constant_mask_spec(rng, nv, nt, ny):
    raw = [rng.random() + 0.05 for _ in range(nv * nt * ny)]
    total = sum(raw)
    return JointSpec.with_constant_masks(
        v_symbols=[f"v{i}" for i in range(nv)],
        t_symbols=[f"t{i}" for i in range(nt)],
        y_symbols=[f"y{i}" for i in range(ny)],
        table=[p / total for p in raw],
    )


def pmi_from_table(spec, *, v, t, y):
    """Enumeration oracle: ln P(t|v)/P(t) and ln P(y|t)/P(y) off the raw table."""

    nv, nt, ny = len(spec.v_symbols), len(spec.t_symbols), len(spec.y_symbols)

    def mass(vi=None, ti=None, yi=None):
        total = 0.0
        for a in range(nv):
            for b in range(nt):
                for c in range(ny):
                    if vi is not None and a != vi:
                        continue
                    if ti is not None and b != ti:
                        continue
                    if yi is not None and c != yi:
                        continue
                    total += spec.table[(a * nt + b) * ny + c]
        return total

    iv, it, iy = spec.v_symbols.index(v), spec.t_symbols.index(t), spec.y_symbols.index(y)
    grounding = math.log(mass(vi=iv, ti=it) / mass(vi=iv)) - math.log(mass(ti=it))
    utility = math.log(mass(ti=it, yi=iy) / mass(ti=it)) - math.log(mass(yi=iy))
    return grounding, utility


def test_masked_inference_equals_pmi_under_independent_masks():
    # With uninformative masks, the two-call estimates reduce by Bayes'
    # theorem to exact pointwise mutual information; check against direct
    # enumeration of the joint table.
    rng = random.Random(202)
    for _ in range(30):
        nv, nt, ny = rng.randint(2, 4), rng.randint(2, 4), rng.randint(2, 4)
        spec = random_constant_mask_spec(rng, nv, nt, ny)
        provider = MockProvider(spec)
        v = rng.choice(spec.v_symbols)
        t = rng.choice(spec.t_symbols)
        y = rng.choice(spec.y_symbols)
        g, *_ = grounding_score(
            candidate(t), manifest((v,)), masked(), provider
        )
        u, *_ = utility_score(
            candidate(t), (f"{v}#masked",),
            task(truth=y, labels=tuple(spec.y_symbols)), provider,
        )
        expected_g, expected_u = pmi_from_table(spec, v=v, t=t, y=y)
        assert abs(g - expected_g) <= 1e-9
        assert abs(u - expected_u) <= 1e-9


def make_job(spec, texts, truth="A", labels=("A", "B")):
    return ScoringJob(
        manifest=manifest(),
        candidates=tuple(candidate(t, cid=f"c{i}") for i, t in enumerate(texts)),
        task=task(truth, labels),
        masked_texts=tuple(masked() for _ in texts),
        video_mask_plan=plan_video_mask(manifest(), "crop_retain", seed=1),
        provider_id="mock:joint",
    )


def two_candidate_spec():
    return JointSpec.with_constant_masks(
        v_symbols=["v0"],
        t_symbols=["t0", "t1"],
        y_symbols=["A", "B"],
        table=[0.25 * 0.9, 0.25 * 0.1, 0.75 * 0.1, 0.75 * 0.9],
    )


def test_score_all_matches_single_ops():
    spec = two_candidate_spec()
    provider = MockProvider(spec)
    job = make_job(spec, ["t0"])
    (card,) = score_all(job, provider)
    g, led_a, led_b = grounding_score(job.candidates[0], job.manifest, masked(), provider)
    u, led_c, led_d = utility_score(
        job.candidates[0], masked_frame_refs(job.manifest, job.video_mask_plan),
        job.task, provider,
    )
    assert card.grounding == g
    assert card.utility == u
    assert card.token_ledger == (
        led_a.logprobs, led_b.logprobs, led_c.logprobs, led_d.logprobs
    )
    assert validate_scorecard(card) == []
    assert card.template_ids == job.templates.scoring_ids()


def test_failure_isolates_to_one_candidate():
    spec = two_candidate_spec()

    class Flaky(MockProvider):
        def score_target(self, ctx, target):
            if target == "t1":
                raise ProviderError("synthetic outage")
            return super().score_target(ctx, target)

    job = make_job(spec, ["t0", "t1"])
    cards = score_all(job, Flaky(spec))
    assert [c.candidate_id for c in cards] == ["c0", "c1"]
    assert cards[0].valid
    assert not cards[1].valid
    assert math.isnan(cards[1].grounding)


def test_neg_inf_denominator_marks_card_invalid():
    # One candidate has zero conditional probability: its card is invalid,
    # the other stays valid.
    spec = JointSpec.with_constant_masks(
        v_symbols=["v0"],
        t_symbols=["t0", "t1"],
        y_symbols=["A", "B"],
        table=[0.5 * 0.9, 0.5 * 0.1, 0.5, 0.0],
    )
    job = make_job(spec, ["t0", "t1"], truth="B")
    cards = score_all(job, MockProvider(spec))
    assert cards[0].valid
    assert not cards[1].valid
    assert validate_scorecard(cards[1]) == []


def test_all_candidates_failing_raises_job_error():
    spec = two_candidate_spec()

    class Down(MockProvider):
        def score_target(self, ctx, target):
            raise ProviderError("endpoint down")

    job = make_job(spec, ["t0", "t1"])
    with pytest.raises(ProviderError, match="endpoint down"):
        score_all(job, Down(spec))


def test_parallel_scoring_preserves_order_and_values():
    spec = two_candidate_spec()
    provider = MockProvider(spec)
    job = make_job(spec, ["t0", "t1"])
    serial = score_all(job, provider, max_inflight=1)
    parallel = score_all(job, provider, max_inflight=4)
    assert serial == parallel


def test_mock_and_replay_yield_identical_cards(tmp_path):
    spec = two_candidate_spec()
    provider = MockProvider(spec)
    job = make_job(spec, ["t0", "t1"])
    direct = score_all(job, provider)

    recorded = score_all(job, RecordingProvider(provider, tmp_path))
    replayed = score_all(job, ReplayProvider(tmp_path))
    assert direct == recorded == replayed
    direct_bytes = [canonical_json(scorecard_to_dict(c)) for c in direct]
    replay_bytes = [canonical_json(scorecard_to_dict(c)) for c in replayed]
    assert direct_bytes == replay_bytes


def test_job_validation_rejects_mismatched_masked_texts():
    spec = two_candidate_spec()
    job = ScoringJob(
        manifest=manifest(),
        candidates=(candidate("t0"),),
        task=task(),
        masked_texts=(),
        video_mask_plan=plan_video_mask(manifest(), "none", seed=0),
        provider_id="mock:joint",
    )
    with pytest.raises(ValueError, match="masked texts"):
        score_all(job, MockProvider(spec))


def test_per_token_diagnostics_and_csv():
    spec = two_candidate_spec()
    job = make_job(spec, ["t0"])
    (card,) = score_all(job, MockProvider(spec))
    assert per_token_average(card, "grounding") == card.grounding / len(card.token_ledger[0])
    csv = cards_to_csv_extended([card])
    header = csv.split("\n", 1)[0]
    assert header == (
        "candidate_id,grounding,utility,provider_id,valid,"
        "grounding_per_token,utility_per_token"
    )
    dump = ledger_dump([card])
    assert "grounding_with_video" in dump
    assert "utility_no_summary" in dump
