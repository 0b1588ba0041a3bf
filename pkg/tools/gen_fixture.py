#!/usr/bin/env python3
"""Regenerate the bundled mock fixture under src/vidscore/data/fixture/.

The fixture couples three things that must stay consistent:
  * the dataset (frames, manifests, tasks, candidate texts),
  * the joint distribution whose T symbols are the candidate texts and whose
    T-mask map equals the real masking pipeline's output on those texts,
  * the synthetic study cohort used by the stats stage.

Re-run this script (then regenerate test goldens) whenever the tokenizer,
tf-idf scheme, or masking rules change.
"""

from __future__ import annotations

import hashlib
import json
import random
import sys
from pathlib import Path

from PIL import Image

REPO = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(REPO / "src"))

from vidscore.domain import canonical_json  # noqa: E402
from vidscore.ingest import PRESETS  # noqa: E402
from vidscore.masking import extract_keywords, mask_text  # noqa: E402

FIXTURE = REPO / "src" / "vidscore" / "data" / "fixture"

TRAFFIC_SCAFFOLD = (
    "The camera follows a {adj} {noun} weaving through the junction "
    "while the signal stays {color}."
)
LECTURE_SCAFFOLD = (
    "A lecturer outlines how {topic} methods reshape {field} research "
    "during the recorded talk."
)

TRAFFIC_FILLS = [
    ("silver", "hatchback", "amber"),
    ("maroon", "van", "crimson"),
    ("beige", "scooter", "emerald"),
    ("cobalt", "tractor", "violet"),
    ("ochre", "minibus", "turquoise"),
]
LECTURE_FILLS = [
    ("bayesian", "robotics"),
    ("contrastive", "genomics"),
    ("variational", "linguistics"),
    ("adversarial", "astronomy"),
    ("spectral", "economics"),
]

# P(T | V): each video can emit every text; its own scaffold dominates.
P_T_GIVEN_A = [0.30, 0.22, 0.16, 0.12, 0.10, 0.08, 0.005, 0.005, 0.005, 0.005]
P_T_GIVEN_B = [0.01, 0.02, 0.05, 0.12, 0.20, 0.25, 0.15, 0.10, 0.06, 0.04]

LABELS = ["A", "B", "C", "D"]
TRUTH = {"vid-a": "A", "vid-b": "C"}
# P(truth label | own video, text) for the five own-scaffold texts.
P_TRUTH_A = [0.30, 0.70, 0.55, 0.80, 0.25]
P_TRUTH_B = [0.75, 0.60, 0.45, 0.85, 0.20]
P_BASE = 0.25  # uninformative label probability elsewhere

FRAME_COLORS = {
    "vid-a": [(180, 40, 40), (200, 80, 40), (220, 120, 40), (240, 160, 40)],
    "vid-b": [(40, 60, 180), (40, 100, 200), (40, 140, 220), (40, 180, 240)],
}


def texts() -> list[str]:
    out = [
        TRAFFIC_SCAFFOLD.format(adj=a, noun=n, color=c) for a, n, c in TRAFFIC_FILLS
    ]
    out.extend(LECTURE_SCAFFOLD.format(topic=t, field=f) for t, f in LECTURE_FILLS)
    return out


def p_truth(video: str, text_index: int, label: str) -> float:
    if video == "vid-a" and text_index < 5:
        p = P_TRUTH_A[text_index] if label == TRUTH["vid-a"] else None
    elif video == "vid-b" and text_index >= 5:
        p = P_TRUTH_B[text_index - 5] if label == TRUTH["vid-b"] else None
    else:
        p = P_BASE if label == TRUTH[video] else None
    if p is not None:
        return p
    if video == "vid-a" and text_index < 5:
        rest = 1.0 - P_TRUTH_A[text_index]
    elif video == "vid-b" and text_index >= 5:
        rest = 1.0 - P_TRUTH_B[text_index - 5]
    else:
        rest = 1.0 - P_BASE
    return rest / 3.0


def build_dataset() -> None:
    all_texts = texts()
    dataset = FIXTURE / "dataset"
    for video_id, text_range, duration in (
        ("vid-a", range(0, 5), 14.0),
        ("vid-b", range(5, 10), 300.0),
    ):
        vdir = dataset / video_id
        frames_dir = vdir / "frames"
        frames_dir.mkdir(parents=True, exist_ok=True)
        frame_paths = []
        for i, color in enumerate(FRAME_COLORS[video_id]):
            img = Image.new("RGB", (8, 8), color)
            img.putpixel((i, i), (255, 255, 255))
            rel = f"{video_id}/frames/f{i}.png"
            img.save(dataset / rel)
            frame_paths.append(rel)
        manifest = {
            "video_id": video_id,
            "frame_paths": frame_paths,
            "frame_count": len(frame_paths),
            "duration_s": duration,
            "dataset_tag": "custom",
        }
        (vdir / "manifest.jsonl").write_text(canonical_json(manifest) + "\n", "utf-8")
        if video_id == "vid-a":
            task = {
                "video_id": video_id,
                "question": "What does the signal show while the vehicle crosses?",
                "options": [
                    ["A", "It stays the same color throughout"],
                    ["B", "It cycles to green"],
                    ["C", "It is switched off"],
                    ["D", "It flashes continuously"],
                ],
                "truth_label": "A",
            }
        else:
            task = {
                "video_id": video_id,
                "question": "Which research area does the talk belong to?",
                "options": [
                    ["A", "Optimization"],
                    ["B", "Generative models"],
                    ["C", "Probabilistic methods"],
                    ["D", "Robotics"],
                ],
                "truth_label": "C",
            }
        (vdir / "tasks.jsonl").write_text(canonical_json(task) + "\n", "utf-8")
        lines = []
        for j, ti in enumerate(text_range):
            record = {
                "video_id": video_id,
                "candidate_id": f"{video_id}-c{j}",
                "text": all_texts[ti],
                "temperature": [1.0, 0.9, 0.7, 0.5, 0.3][j],
                "source": "sampled",
            }
            lines.append(canonical_json(record))
        (vdir / "candidates.jsonl").write_text("\n".join(lines) + "\n", "utf-8")


def build_jointspec() -> None:
    all_texts = texts()
    preset = PRESETS["fixture"]
    keywords = extract_keywords(all_texts, preset.tfidf)
    print(f"keyword set: {len(keywords.terms)} terms")
    for term, score in keywords.terms:
        print(f"  {term}  {score:.4f}")
    t_mask = {}
    for text in all_texts:
        t_mask[text] = mask_text(text, keywords).text
    masked_values = sorted(set(t_mask.values()))
    print("distinct masked texts:")
    for m in masked_values:
        print(f"  {m}")
    assert len(masked_values) == 2, "expected the two scaffolds to collapse"

    table = []
    for video_id, pt in (("vid-a", P_T_GIVEN_A), ("vid-b", P_T_GIVEN_B)):
        for ti in range(10):
            for label in LABELS:
                table.append(0.5 * pt[ti] * p_truth(video_id, ti, label))
    assert abs(sum(table) - 1.0) < 1e-12

    aliases = {}
    for video_id in ("vid-a", "vid-b"):
        for i in range(4):
            aliases[f"{video_id}/frames/f{i}.png"] = video_id

    payload = {
        "spec": {
            "spec_id": "fixture-v1",
            "v_symbols": ["vid-a", "vid-b"],
            "t_symbols": all_texts,
            "y_symbols": LABELS,
            "table": table,
            "v_mask": {"vid-a": "__vmask__", "vid-b": "__vmask__"},
            "t_mask": t_mask,
        },
        "frame_aliases": aliases,
    }
    (FIXTURE / "jointspec.json").write_text(
        json.dumps(payload, indent=2, sort_keys=True, ensure_ascii=False) + "\n", "utf-8"
    )


def expected_cards() -> None:
    """Print the exact scores and fronts the fixture produces, for eyeballing."""

    pv = {"vid-a": 0.5, "vid-b": 0.5}
    pt = {"vid-a": P_T_GIVEN_A, "vid-b": P_T_GIVEN_B}
    import math

    for video_id, text_range in (("vid-a", range(0, 5)), ("vid-b", range(5, 10))):
        group = list(text_range)
        rows = []
        for ti in group:
            own = pt[video_id][ti]
            group_mass_own = sum(pt[video_id][i] for i in group)
            p_t_group = sum(pv[v] * pt[v][ti] for v in pv) / sum(
                pv[v] * pt[v][i] for v in pv for i in group
            )
            g = math.log((own / group_mass_own) / p_t_group)
            truth = TRUTH[video_id]
            p_y_t = sum(pv[v] * pt[v][ti] * p_truth(v, ti, truth) for v in pv) / sum(
                pv[v] * pt[v][ti] for v in pv
            )
            p_y = sum(
                pv[v] * pt[v][i] * p_truth(v, i, truth) for v in pv for i in range(10)
            )
            u = math.log(p_y_t / p_y)
            rows.append((f"{video_id}-c{ti - group[0]}", g, u))
        print(f"{video_id}:")
        for cid, g, u in rows:
            print(f"  {cid}  g={g:+.4f}  u={u:+.4f}")
        front = [
            cid
            for cid, g, u in rows
            if not any(
                (g2 >= g and u2 >= u and (g2 > g or u2 > u)) for _, g2, u2 in rows
            )
        ]
        print(f"  front: {sorted(front)}")
        for seed in range(4):
            material = f"naive:{seed}:{video_id}".encode()
            rng = random.Random(int.from_bytes(hashlib.sha256(material).digest()[:8], "big"))
            pick = rng.choice(sorted(f"{video_id}-c{j}" for j in range(5)))
            tag = "dominated" if pick not in front else "ON FRONT"
            print(f"  naive pick (seed {seed}): {pick} [{tag}]")


def build_cohort() -> None:
    rng = random.Random(20240612)
    conditions = {
        "video_only": ([2, 3, 2, 3], (170.0, 215.0)),
        "naive": ([2, 3, 3, 4], (40.0, 60.0)),
        "max_g": ([3, 4, 3, 4], (50.0, 70.0)),
        "max_u": ([3, 4, 4, 5], (35.0, 55.0)),
        "cot": ([3, 3, 4, 4], (55.0, 75.0)),
    }
    stimuli = [f"s{i}" for i in range(10)]
    lines = []
    pid = 0
    for condition, (correct_counts, rt_range) in conditions.items():
        for n_correct in correct_counts:
            pid += 1
            participant = f"p{pid:03d}"
            correct_flags = [i < n_correct for i in range(10)]
            rng.shuffle(correct_flags)
            for stim, flag in zip(stimuli, correct_flags):
                rt = round(rng.uniform(*rt_range) / 10.0, 3)
                lines.append(
                    canonical_json(
                        {
                            "participant_id": participant,
                            "condition": condition,
                            "stimulus_id": stim,
                            "correct": flag,
                            "response_time_s": rt,
                        }
                    )
                )
    (FIXTURE / "responses.jsonl").write_text("\n".join(lines) + "\n", "utf-8")

    attr_lines = []
    for condition in ("naive", "max_g", "max_u", "cot"):
        quality = {"naive": 0.2, "max_g": 0.6, "max_u": 1.0, "cot": 0.5}[condition]
        for i, stim in enumerate(stimuli):
            grounding = round(0.3 + 0.5 * quality + 0.04 * i + rng.uniform(-0.05, 0.05), 4)
            utility = round(0.2 + 0.9 * quality + 0.03 * i + rng.uniform(-0.05, 0.05), 4)
            words = int(60 - 25 * quality + 3 * i + rng.randint(-4, 4))
            attr_lines.append(
                canonical_json(
                    {
                        "condition": condition,
                        "stimulus_id": stim,
                        "grounding": grounding,
                        "utility": utility,
                        "word_count": words,
                    }
                )
            )
    (FIXTURE / "stimulus_attrs.jsonl").write_text("\n".join(attr_lines) + "\n", "utf-8")


def main() -> None:
    FIXTURE.mkdir(parents=True, exist_ok=True)
    build_dataset()
    build_jointspec()
    build_cohort()
    expected_cards()
    print("fixture written to", FIXTURE)


if __name__ == "__main__":
    main()
