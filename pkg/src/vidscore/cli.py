"""Operator CLI: a staged pipeline with file artifacts.

Each subcommand reads the previous stage's artifacts from the output
directory and writes its own, so runs can resume after provider failures
and every scoring call stays auditable.  Artifacts embed the config hash
and template ids that produced them; re-running with an identical config on
the mock or replay transport reproduces identical bytes.

Exit codes: 0 success, 2 stage dependency missing, 3 live transport without
credentials, 4 provider/transport failure, 1 anything else.  Failures print
a single machine-readable JSON error record to stderr.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import random
import sys
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any, Sequence

import vidscore
from vidscore import ingest, scoring, selection, stats
from vidscore.domain import (
    ResponseRecord,
    ScoreCard,
    SummaryCandidate,
    candidate_from_dict,
    candidate_to_dict,
    canonical_json,
    mask_plan_from_dict,
    mask_plan_to_dict,
    masked_text_from_dict,
    masked_text_to_dict,
    response_record_from_dict,
    scorecard_from_dict,
    scorecard_to_dict,
)
from vidscore.masking import (
    KeywordSet,
    OcrOutputMissingError,
    extract_keywords,
    keywords_to_csv,
    load_ocr_records,
    mask_text,
    plan_video_mask,
)
from vidscore.provider import (
    CompletionsProvider,
    EchoScoringUnsupportedError,
    MockProvider,
    Provider,
    ProviderError,
    RecordingProvider,
    ReplayMissError,
    ReplayProvider,
    ScoringContext,
)
from vidscore.provider.mock import load_jointspec_file
from vidscore.provider.templates import TemplateSet
from vidscore.svg import Series, scatter_svg

ENV_API_KEY = "VIBE_API_KEY"
ENV_ENDPOINT = "VIBE_ENDPOINT"

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_MISSING_DEPENDENCY = 2
EXIT_NO_CREDENTIALS = 3
EXIT_PROVIDER = 4

GENERATION_INSTRUCTION = "Write one concise summary of the video, a single short paragraph."

DEFAULT_TEMPERATURES = (1.0, 0.9, 0.7, 0.5, 0.3)


class CliError(RuntimeError):
    def __init__(self, code: int, kind: str, message: str) -> None:
        super().__init__(message)
        self.code = code
        self.kind = kind


@dataclass(frozen=True)
class RunConfig:
    root: str = "fixture"
    preset: str = "fixture"
    transport: str = "mock"
    endpoint: str | None = None
    model: str | None = None
    jointspec: str | None = None
    fixtures_dir: str | None = None
    record: bool = False
    k: int = 5
    temperatures: tuple[float, ...] = DEFAULT_TEMPERATURES
    alpha: float = 0.5
    beta: float = 0.5
    seed: int = 0
    out: str = "out"
    max_inflight: int = 1
    templates_dir: str | None = None

    def __post_init__(self) -> None:
        if self.transport not in {"live", "mock", "replay"}:
            raise ValueError(f"unknown transport {self.transport!r}")
        if self.k < 1:
            raise ValueError("k must be >= 1")
        object.__setattr__(self, "temperatures", tuple(float(t) for t in self.temperatures))

    @property
    def config_hash(self) -> str:
        # Paths are excluded so the hash identifies the run's scientific
        # content, not where files happen to live on one machine.
        body = canonical_json(
            {
                "preset": self.preset,
                "transport": self.transport,
                "model": self.model,
                "k": self.k,
                "temperatures": list(self.temperatures),
                "alpha": self.alpha,
                "beta": self.beta,
                "seed": self.seed,
                "templates": list(TemplateSet().scoring_ids()),
            }
        )
        return hashlib.sha256(body.encode("utf-8")).hexdigest()[:16]


def load_config_file(path: str | Path) -> dict[str, Any]:
    text = Path(path).read_text(encoding="utf-8")
    if str(path).endswith((".yaml", ".yml")):
        import yaml

        data = yaml.safe_load(text)
    else:
        data = json.loads(text)
    if not isinstance(data, dict):
        raise CliError(EXIT_ERROR, "bad_config", f"config root must be a mapping: {path}")
    if any(key in data for key in ("api_key", "VIBE_API_KEY")):
        raise CliError(
            EXIT_ERROR, "bad_config", "config files must not store keys; use environment"
        )
    return data


def resolve_config(args: argparse.Namespace) -> RunConfig:
    values: dict[str, Any] = {}
    if getattr(args, "config", None):
        values.update(load_config_file(args.config))
    for key in (
        "root",
        "preset",
        "transport",
        "endpoint",
        "model",
        "jointspec",
        "fixtures_dir",
        "k",
        "alpha",
        "beta",
        "seed",
        "out",
        "max_inflight",
        "templates_dir",
    ):
        value = getattr(args, key, None)
        if value is not None:
            values[key] = value
    if getattr(args, "temperatures", None):
        values["temperatures"] = tuple(float(t) for t in args.temperatures.split(","))
    if getattr(args, "record", False):
        values["record"] = True
    if "temperatures" in values:
        values["temperatures"] = tuple(values["temperatures"])
    endpoint_env = os.environ.get(ENV_ENDPOINT)
    if endpoint_env and not values.get("endpoint"):
        values["endpoint"] = endpoint_env
    try:
        return RunConfig(**values)
    except (TypeError, ValueError) as exc:
        raise CliError(EXIT_ERROR, "bad_config", str(exc)) from exc


# -- path and artifact helpers ----------------------------------------------

def dataset_root(cfg: RunConfig) -> Path:
    if cfg.root == "fixture":
        return vidscore.fixture_root() / "dataset"
    return Path(cfg.root)


def default_jointspec(cfg: RunConfig) -> Path:
    if cfg.jointspec:
        return Path(cfg.jointspec)
    if cfg.root == "fixture":
        return vidscore.fixture_root() / "jointspec.json"
    raise CliError(EXIT_ERROR, "bad_config", "mock transport needs --jointspec")


def meta_string(cfg: RunConfig) -> str:
    templates = "|".join(TemplateSet().scoring_ids())
    return f"config_hash={cfg.config_hash} template_ids={templates}"


def meta_record(cfg: RunConfig) -> dict[str, Any]:
    return {
        "_meta": {
            "config_hash": cfg.config_hash,
            "template_ids": list(TemplateSet().scoring_ids()),
        }
    }


def write_jsonl(path: Path, cfg: RunConfig, records: Sequence[dict[str, Any]]) -> None:
    lines = [canonical_json(meta_record(cfg))]
    lines.extend(canonical_json(r) for r in records)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_jsonl_artifact(path: Path) -> list[dict[str, Any]]:
    records = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            record = json.loads(line)
            if "_meta" in record:
                continue
            records.append(record)
    return records


def write_csv(path: Path, cfg: RunConfig, body: str) -> None:
    path.write_text(f"# {meta_string(cfg)}\n{body}", encoding="utf-8")


def require_artifact(out_dir: Path, name: str) -> Path:
    path = out_dir / name
    if not path.is_file():
        raise CliError(
            EXIT_MISSING_DEPENDENCY,
            "stage_dependency_missing",
            f"stage dependency missing: {path} (run the producing stage first)",
        )
    return path


def build_provider(cfg: RunConfig) -> Provider:
    if cfg.transport == "mock":
        spec, aliases = load_jointspec_file(default_jointspec(cfg))
        return MockProvider(spec, seed=cfg.seed, frame_aliases=aliases)
    if cfg.transport == "replay":
        if not cfg.fixtures_dir:
            raise CliError(EXIT_ERROR, "bad_config", "replay transport needs --fixtures-dir")
        return ReplayProvider(cfg.fixtures_dir)
    endpoint = cfg.endpoint
    api_key = os.environ.get(ENV_API_KEY)
    if not endpoint or not api_key:
        raise CliError(
            EXIT_NO_CREDENTIALS,
            "missing_credentials",
            f"live transport needs an endpoint and {ENV_API_KEY} in the environment",
        )
    provider: Provider = CompletionsProvider(
        endpoint, cfg.model or "default", api_key, template_dir=cfg.templates_dir
    )
    if cfg.record:
        if not cfg.fixtures_dir:
            raise CliError(EXIT_ERROR, "bad_config", "--record needs --fixtures-dir")
        provider = RecordingProvider(provider, cfg.fixtures_dir)
    return provider


def load_data(cfg: RunConfig) -> ingest.LoadResult:
    preset = ingest.PRESETS.get(cfg.preset)
    if preset is None:
        raise CliError(EXIT_ERROR, "bad_config", f"unknown preset {cfg.preset!r}")
    return ingest.load_dataset(dataset_root(cfg), preset)


def candidates_for_pipeline(
    cfg: RunConfig, data: ingest.LoadResult, out_dir: Path
) -> dict[str, list[SummaryCandidate]]:
    """Sampled candidates from the sample stage if present, else the dataset's."""

    sampled = out_dir / "candidates.jsonl"
    if sampled.is_file():
        grouped: dict[str, list[SummaryCandidate]] = {}
        for record in read_jsonl_artifact(sampled):
            grouped.setdefault(str(record["video_id"]), []).append(
                candidate_from_dict(record)
            )
        return grouped
    return {vid: list(cands) for vid, cands in data.candidates.items()}


# -- stages -------------------------------------------------------------------

def stage_keywords(cfg: RunConfig, out_dir: Path) -> None:
    data = load_data(cfg)
    preset = ingest.PRESETS[cfg.preset]
    candidates = candidates_for_pipeline(cfg, data, out_dir)
    corpus: list[str] = []
    extras: list[str] = []
    for manifest in data.manifests:
        corpus.extend(c.text for c in candidates.get(manifest.video_id, ()))
        if preset.use_author_keywords:
            kw_file = dataset_root(cfg) / manifest.video_id / "keywords.txt"
            if kw_file.is_file():
                extras.extend(
                    line.strip()
                    for line in kw_file.read_text(encoding="utf-8").splitlines()
                    if line.strip()
                )
    if not corpus:
        raise CliError(EXIT_ERROR, "empty_corpus", "empty corpus: no candidate texts found")
    tfidf = preset.tfidf
    if extras:
        tfidf = replace(tfidf, extra_keywords=tuple(sorted(set(extras))))
    keyword_set = extract_keywords(corpus, tfidf)
    payload = {
        "keyword_set_id": keyword_set.keyword_set_id,
        "terms": [list(t) for t in keyword_set.terms],
        "corpus_fingerprint": keyword_set.corpus_fingerprint,
        "doc_freq": list(keyword_set.doc_freq),
    }
    write_jsonl(out_dir / "keywords.json", cfg, [payload])
    write_csv(out_dir / "keywords.csv", cfg, keywords_to_csv(keyword_set))


def load_keyword_set(out_dir: Path) -> KeywordSet:
    path = require_artifact(out_dir, "keywords.json")
    (record,) = read_jsonl_artifact(path)
    return KeywordSet(
        keyword_set_id=str(record["keyword_set_id"]),
        terms=tuple((str(t), float(s)) for t, s in record["terms"]),
        corpus_fingerprint=str(record["corpus_fingerprint"]),
        doc_freq=tuple(float(f) for f in record.get("doc_freq", ())),
    )


def stage_mask(cfg: RunConfig, out_dir: Path) -> None:
    data = load_data(cfg)
    preset = ingest.PRESETS[cfg.preset]
    keyword_set = load_keyword_set(out_dir)
    candidates = candidates_for_pipeline(cfg, data, out_dir)

    masked_records = []
    plan_records = []
    for manifest in data.manifests:
        for candidate in candidates.get(manifest.video_id, ()):
            masked = mask_text(candidate.text, keyword_set)
            masked_records.append(
                {
                    "video_id": manifest.video_id,
                    "candidate_id": candidate.candidate_id,
                    "masked": masked_text_to_dict(masked),
                }
            )
        ocr_words = None
        if preset.mask_strategy == "ocr_regions":
            ocr_path = dataset_root(cfg) / manifest.video_id / "ocr.txt"
            if not ocr_path.is_file():
                raise CliError(
                    EXIT_PROVIDER, "ocr_output_missing", f"ocr output missing: {ocr_path}"
                )
            ocr_words = load_ocr_records(ocr_path)
        plan = plan_video_mask(
            manifest,
            preset.mask_strategy,
            cfg.seed,
            ocr_words=ocr_words,
            keywords=keyword_set if preset.mask_strategy == "ocr_regions" else None,
        )
        plan_records.append(
            {"video_id": manifest.video_id, "plan": mask_plan_to_dict(plan)}
        )
    write_jsonl(out_dir / "masked_texts.jsonl", cfg, masked_records)
    write_jsonl(out_dir / "mask_plans.jsonl", cfg, plan_records)


def stage_sample(cfg: RunConfig, out_dir: Path) -> None:
    data = load_data(cfg)
    provider = build_provider(cfg)
    records = []
    for manifest in data.manifests:
        ctx = ScoringContext(
            text_blocks=(GENERATION_INSTRUCTION,),
            frames=manifest.frame_paths,
            template_id=TemplateSet().generation,
        )
        candidates = provider.sample_candidates(
            ctx, cfg.k, cfg.temperatures[: cfg.k], id_prefix=f"{manifest.video_id}-s"
        )
        for candidate in candidates:
            records.append({"video_id": manifest.video_id, **candidate_to_dict(candidate)})
    write_jsonl(out_dir / "candidates.jsonl", cfg, records)


def stage_score(cfg: RunConfig, out_dir: Path) -> None:
    data = load_data(cfg)
    masked_path = require_artifact(out_dir, "masked_texts.jsonl")
    plans_path = require_artifact(out_dir, "mask_plans.jsonl")
    masked_by_candidate = {
        str(r["candidate_id"]): masked_text_from_dict(r["masked"])
        for r in read_jsonl_artifact(masked_path)
    }
    plans_by_video = {
        str(r["video_id"]): mask_plan_from_dict(r["plan"])
        for r in read_jsonl_artifact(plans_path)
    }
    candidates = candidates_for_pipeline(cfg, data, out_dir)
    provider = build_provider(cfg)

    card_records = []
    all_cards = []
    for manifest in data.manifests:
        video_candidates = candidates.get(manifest.video_id, [])
        tasks = data.tasks.get(manifest.video_id, ())
        if not video_candidates or not tasks:
            continue
        try:
            masked_texts = tuple(
                masked_by_candidate[c.candidate_id] for c in video_candidates
            )
        except KeyError as exc:
            raise CliError(
                EXIT_MISSING_DEPENDENCY,
                "stage_dependency_missing",
                f"stage dependency missing: no masked text for candidate {exc}",
            ) from exc
        job = scoring.ScoringJob(
            manifest=manifest,
            candidates=tuple(video_candidates),
            task=tasks[0],
            masked_texts=masked_texts,
            video_mask_plan=plans_by_video[manifest.video_id],
            provider_id=provider.provider_id,
        )
        cards = scoring.score_all(job, provider, max_inflight=cfg.max_inflight)
        all_cards.extend(cards)
        card_records.extend(
            {"video_id": manifest.video_id, "card": scorecard_to_dict(card)}
            for card in cards
        )
    write_jsonl(out_dir / "cards.jsonl", cfg, card_records)
    write_csv(out_dir / "cards.csv", cfg, scoring.cards_to_csv_extended(all_cards))
    (out_dir / "ledgers.json").write_text(scoring.ledger_dump(all_cards), encoding="utf-8")


def load_cards(out_dir: Path) -> dict[str, list[ScoreCard]]:
    path = require_artifact(out_dir, "cards.jsonl")
    grouped: dict[str, list[ScoreCard]] = {}
    for record in read_jsonl_artifact(path):
        grouped.setdefault(str(record["video_id"]), []).append(
            scorecard_from_dict(record["card"])
        )
    return grouped


def _naive_pick(cfg: RunConfig, video_id: str, candidates: Sequence[SummaryCandidate]) -> str | None:
    sampled = [c.candidate_id for c in candidates if c.source == "sampled"]
    if not sampled:
        return None
    seed_material = f"naive:{cfg.seed}:{video_id}".encode("utf-8")
    rng = random.Random(int.from_bytes(hashlib.sha256(seed_material).digest()[:8], "big"))
    return rng.choice(sorted(sampled))


def stage_select(cfg: RunConfig, out_dir: Path, also_sweep: bool = False) -> None:
    cards_by_video = load_cards(out_dir)
    lines = ["video_id,alpha,beta,candidate_id,grounding,utility"]
    for video_id in sorted(cards_by_video):
        cards = cards_by_video[video_id]
        config = selection.SelectionConfig(alpha=cfg.alpha, beta=cfg.beta)
        chosen = selection.select_best(cards, config)
        card = next(c for c in cards if c.candidate_id == chosen)
        lines.append(
            f"{video_id},{cfg.alpha!r},{cfg.beta!r},{chosen},"
            f"{card.grounding!r},{card.utility!r}"
        )
    write_csv(out_dir / "selection.csv", cfg, "\n".join(lines) + "\n")
    if also_sweep:
        stage_sweep(cfg, out_dir)


def stage_sweep(cfg: RunConfig, out_dir: Path) -> None:
    data = load_data(cfg)
    cards_by_video = load_cards(out_dir)
    candidates = candidates_for_pipeline(cfg, data, out_dir)
    csv_chunks = []
    header_written = False
    for video_id in sorted(cards_by_video):
        cards = cards_by_video[video_id]
        result = selection.sweep(cards)
        chunk = selection.sweep_to_csv(result, video_id=video_id)
        csv_chunks.append(chunk if not header_written else chunk.split("\n", 1)[1])
        header_written = True
        highlights: dict[str, str] = {}
        for candidate in candidates.get(video_id, ()):
            if candidate.source in ("cot", "external"):
                highlights[candidate.candidate_id] = candidate.source
        naive = _naive_pick(cfg, video_id, candidates.get(video_id, ()))
        if naive is not None:
            highlights.setdefault(naive, "naive")
        svg = selection.sweep_to_svg(
            cards,
            result,
            title=f"Grounding vs utility: {video_id}",
            highlights=highlights,
            meta=meta_string(cfg),
        )
        (out_dir / f"pareto_{video_id}.svg").write_text(svg, encoding="utf-8")
    write_csv(out_dir / "sweep.csv", cfg, "".join(csv_chunks))


def stage_stats(cfg: RunConfig, out_dir: Path, args: argparse.Namespace) -> None:
    responses_path = getattr(args, "responses", None)
    if not responses_path:
        default = dataset_root(cfg).parent / "responses.jsonl"
        if not default.is_file():
            raise CliError(
                EXIT_MISSING_DEPENDENCY,
                "stage_dependency_missing",
                "stage dependency missing: no responses file (pass --responses)",
            )
        responses_path = default
    records = [
        response_record_from_dict(d) for d in read_jsonl_artifact(Path(responses_path))
    ]
    summaries = stats.condition_table(records)
    write_csv(out_dir / "table1.csv", cfg, stats.condition_table_to_csv(summaries))
    write_csv(out_dir / "participants.csv", cfg, stats.participants_to_csv(records))

    grouped = stats.group_participants(records)
    series = []
    palette = {"video_only": "#777777", "naive": "#d65f5f", "max_g": "#956cb4",
               "max_u": "#ee854a", "cot": "#6acc64"}
    for condition in stats.CONDITION_ORDER:
        members = grouped.get(condition)
        if not members:
            continue
        points = tuple(
            (m.accuracy * 100.0, 1.0 / m.total_rt) for m in members if m.total_rt > 0
        )
        series.append(Series(name=condition, points=points, color=palette[condition]))
    svg = scatter_svg(
        series,
        title="Accuracy vs inverse response time",
        x_label="accuracy (%)",
        y_label="1 / response time (1/s)",
        meta=meta_string(cfg),
    )
    (out_dir / "performance.svg").write_text(svg, encoding="utf-8")

    attrs_path = getattr(args, "stimulus_attrs", None)
    if not attrs_path:
        default = dataset_root(cfg).parent / "stimulus_attrs.jsonl"
        attrs_path = default if default.is_file() else None
    if attrs_path:
        attrs = [
            stats.stimulus_attrs_from_dict(d)
            for d in read_jsonl_artifact(Path(attrs_path))
        ]
        rows = stats.correlation_table(records, attrs)
        write_csv(out_dir / "correlations.csv", cfg, stats.correlations_to_csv(rows))
        _write_correlation_svgs(cfg, out_dir, records, attrs)


def _write_correlation_svgs(
    cfg: RunConfig,
    out_dir: Path,
    records: Sequence[ResponseRecord],
    attrs: Sequence[stats.StimulusAttrs],
) -> None:
    attr_map = {(a.condition, a.stimulus_id): a for a in attrs}
    score_points = []
    length_points = []
    per_participant: dict[str, list[ResponseRecord]] = {}
    for r in records:
        per_participant.setdefault(r.participant_id, []).append(r)
    for recs in per_participant.values():
        m = stats.participant_metrics(recs)
        keys = [(r.condition, r.stimulus_id) for r in recs]
        if any(k not in attr_map for k in keys):
            continue
        stim = [attr_map[k] for k in keys]
        mean_utility = sum(a.utility for a in stim) / len(stim)
        mean_words = sum(a.word_count for a in stim) / len(stim)
        total_words = sum(a.word_count for a in stim)
        score_points.append((mean_utility, m.accuracy * 100.0))
        if total_words:
            length_points.append((mean_words, m.total_rt / total_words))
    svg = scatter_svg(
        [Series(name="participants", points=tuple(score_points))],
        title="Utility score vs accuracy",
        x_label="mean utility (nats)",
        y_label="accuracy (%)",
        meta=meta_string(cfg),
    )
    (out_dir / "score_accuracy.svg").write_text(svg, encoding="utf-8")
    svg = scatter_svg(
        [Series(name="participants", points=tuple(length_points), color="#6acc64")],
        title="Word count vs response time per word",
        x_label="mean word count",
        y_label="response time per word (s)",
        meta=meta_string(cfg),
    )
    (out_dir / "length_time.svg").write_text(svg, encoding="utf-8")


def stage_report(cfg: RunConfig, out_dir: Path) -> None:
    cards_by_video = load_cards(out_dir)
    require_artifact(out_dir, "sweep.csv")
    lines = []
    lines.append("# Summary scoring report")
    lines.append("")
    lines.append(f"- preset: `{cfg.preset}`")
    lines.append(f"- transport: `{cfg.transport}`")
    lines.append(f"- selection weights: alpha={cfg.alpha!r}, beta={cfg.beta!r}")
    lines.append(f"- videos scored: {len(cards_by_video)}")
    lines.append("")
    for video_id in sorted(cards_by_video):
        cards = cards_by_video[video_id]
        frontier = selection.pareto_front(cards)
        chosen = selection.select_best(
            cards, selection.SelectionConfig(alpha=cfg.alpha, beta=cfg.beta)
        )
        lines.append(f"## {video_id}")
        lines.append("")
        lines.append("| candidate | grounding | utility | valid | frontier |")
        lines.append("|---|---|---|---|---|")
        for card in cards:
            star = "yes" if card.candidate_id in frontier else ""
            lines.append(
                f"| {card.candidate_id} | {card.grounding:.6f} | {card.utility:.6f} "
                f"| {'yes' if card.valid else 'no'} | {star} |"
            )
        lines.append("")
        lines.append(f"Selected at (alpha={cfg.alpha!r}, beta={cfg.beta!r}): `{chosen}`")
        lines.append("")
    lines.append(f"<!-- {meta_string(cfg)} -->")
    (out_dir / "report.md").write_text("\n".join(lines) + "\n", encoding="utf-8")


# -- argument parsing ---------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vidscore",
        description="Score, select, and report on video summary candidates.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON or YAML run configuration file")
    common.add_argument("--root", help="dataset root directory, or 'fixture'")
    common.add_argument("--preset", help="dataset preset name")
    common.add_argument("--transport", choices=["live", "mock", "replay"])
    common.add_argument("--endpoint", help="live endpoint base URL")
    common.add_argument("--model", help="live model name")
    common.add_argument("--jointspec", help="joint distribution file for the mock transport")
    common.add_argument("--fixtures-dir", dest="fixtures_dir", help="record/replay directory")
    common.add_argument("--record", action="store_true", help="record live responses")
    common.add_argument("--k", type=int, help="number of candidates to sample")
    common.add_argument("--temperatures", help="comma-separated sampling temperatures")
    common.add_argument("--alpha", type=float, help="grounding weight")
    common.add_argument("--beta", type=float, help="utility weight")
    common.add_argument("--seed", type=int, help="seed for all stochastic choices")
    common.add_argument("--max-inflight", dest="max_inflight", type=int,
                        help="parallel scoring calls")
    common.add_argument("--templates-dir", dest="templates_dir",
                        help="directory shadowing bundled prompt templates")
    common.add_argument("--out", help="artifact output directory")

    sub.add_parser("keywords", parents=[common], help="extract the masking keyword set")
    sub.add_parser("mask", parents=[common], help="mask candidate texts and plan frame masks")
    sub.add_parser("sample", parents=[common], help="sample candidate summaries")
    sub.add_parser("score", parents=[common], help="compute grounding/utility scorecards")
    select_p = sub.add_parser("select", parents=[common], help="pick the best candidate")
    select_p.add_argument("--sweep", action="store_true", help="also run the alpha sweep")
    sub.add_parser("sweep", parents=[common], help="alpha sweep and Pareto front")
    stats_p = sub.add_parser("stats", parents=[common], help="human-study statistics")
    stats_p.add_argument("--responses", help="response-record JSONL file")
    stats_p.add_argument("--stimulus-attrs", dest="stimulus_attrs",
                         help="per-stimulus attribute JSONL file")
    sub.add_parser("report", parents=[common], help="write the markdown report")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
        out_dir = Path(cfg.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        if args.command == "keywords":
            stage_keywords(cfg, out_dir)
        elif args.command == "mask":
            stage_mask(cfg, out_dir)
        elif args.command == "sample":
            stage_sample(cfg, out_dir)
        elif args.command == "score":
            stage_score(cfg, out_dir)
        elif args.command == "select":
            stage_select(cfg, out_dir, also_sweep=bool(getattr(args, "sweep", False)))
        elif args.command == "sweep":
            stage_sweep(cfg, out_dir)
        elif args.command == "stats":
            stage_stats(cfg, out_dir, args)
        elif args.command == "report":
            stage_report(cfg, out_dir)
        else:  # pragma: no cover - argparse enforces choices
            raise CliError(EXIT_ERROR, "unknown_command", f"unknown command {args.command!r}")
    except CliError as exc:
        _emit_error(exc.kind, str(exc), exc.code)
        return exc.code
    except ReplayMissError as exc:
        _emit_error("replay_miss", str(exc), EXIT_PROVIDER)
        return EXIT_PROVIDER
    except EchoScoringUnsupportedError as exc:
        _emit_error("echo_scoring_unsupported", str(exc), EXIT_PROVIDER)
        return EXIT_PROVIDER
    except OcrOutputMissingError as exc:
        _emit_error("ocr_output_missing", str(exc), EXIT_PROVIDER)
        return EXIT_PROVIDER
    except ProviderError as exc:
        _emit_error("provider_error", str(exc), EXIT_PROVIDER)
        return EXIT_PROVIDER
    except (ValueError, OSError, KeyError) as exc:
        _emit_error("error", f"{type(exc).__name__}: {exc}", EXIT_ERROR)
        return EXIT_ERROR
    return EXIT_OK


def _emit_error(kind: str, message: str, code: int) -> None:
    record = {"error": kind, "message": message, "exit_code": code}
    print(canonical_json(record), file=sys.stderr)


if __name__ == "__main__":
    sys.exit(main())
