"""Human-study analytics: accuracy, response time, IES, Welch tests, Spearman.

Conventions pinned here:

* ``participant_metrics`` reports accuracy as a fraction and IES as
  total response time divided by that fraction (undefined at accuracy 0).
* ``condition_table`` reports accuracy in percent and its IES column as the
  per-participant ratio of response time to accuracy-in-percent, matching
  the magnitudes of published study tables.  IES aggregation is always the
  mean of per-participant ratios, never the ratio of means.
* The t-test is Welch's (unequal variances) with a one-tailed p-value and
  Cohen's d from the pooled standard deviation.
* Spearman uses average ranks for ties and the two-tailed t-approximation
  for its p-value.
"""

from __future__ import annotations

import io
import logging
import math
from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from scipy import stats as _scipy_stats

from vidscore.domain import ResponseRecord

log = logging.getLogger(__name__)

CONDITION_ORDER = ("video_only", "naive", "max_g", "max_u", "cot")


@dataclass(frozen=True)
class ParticipantMetrics:
    participant_id: str
    condition: str
    n_records: int
    accuracy: float
    total_rt: float
    ies: float | None  # None when accuracy is 0 (undefined, excluded from means)


@dataclass(frozen=True)
class ConditionSummary:
    condition: str
    n: int
    acc_mean: float
    acc_sd: float
    rt_mean: float
    rt_sd: float
    ies_mean: float
    ies_sd: float


@dataclass(frozen=True)
class WelchResult:
    t: float
    df: float
    p_one_tailed: float
    cohens_d: float


@dataclass(frozen=True)
class SpearmanResult:
    r: float
    p: float


def participant_metrics(records: Sequence[ResponseRecord]) -> ParticipantMetrics:
    """Accuracy, total response time, and IES for one participant's records."""

    if not records:
        raise ValueError("participant has no records")
    pids = {r.participant_id for r in records}
    conditions = {r.condition for r in records}
    if len(pids) != 1 or len(conditions) != 1:
        raise ValueError("records must belong to one participant in one condition")
    n = len(records)
    accuracy = sum(1 for r in records if r.correct) / n
    total_rt = sum(r.response_time_s for r in records)
    ies = total_rt / accuracy if accuracy > 0 else None
    return ParticipantMetrics(
        participant_id=records[0].participant_id,
        condition=records[0].condition,
        n_records=n,
        accuracy=accuracy,
        total_rt=total_rt,
        ies=ies,
    )


def group_participants(
    records: Iterable[ResponseRecord],
) -> dict[str, list[ParticipantMetrics]]:
    """Per-condition participant metrics, participants in first-seen order."""

    per_participant: dict[str, list[ResponseRecord]] = defaultdict(list)
    for record in records:
        per_participant[record.participant_id].append(record)
    by_condition: dict[str, list[ParticipantMetrics]] = defaultdict(list)
    for recs in per_participant.values():
        metrics = participant_metrics(recs)
        by_condition[metrics.condition].append(metrics)
    return dict(by_condition)


def _mean(values: Sequence[float]) -> float:
    return sum(values) / len(values)


def _sd(values: Sequence[float]) -> float:
    # Sample standard deviation; a single observation has spread 0 by
    # convention so one-participant conditions still tabulate.
    n = len(values)
    if n < 2:
        return 0.0
    m = _mean(values)
    return math.sqrt(sum((v - m) ** 2 for v in values) / (n - 1))


def condition_table(records: Sequence[ResponseRecord]) -> list[ConditionSummary]:
    """Per-condition summaries over per-participant metrics (never pooled trials)."""

    grouped = group_participants(records)
    out = []
    for condition in CONDITION_ORDER:
        if condition not in grouped:
            continue
        participants = grouped[condition]
        accs = [p.accuracy * 100.0 for p in participants]
        rts = [p.total_rt for p in participants]
        ies_values = [p.total_rt / (p.accuracy * 100.0) for p in participants if p.accuracy > 0]
        excluded = len(participants) - len(ies_values)
        if excluded:
            log.info(
                "condition %s: excluded %d zero-accuracy participant(s) from IES",
                condition,
                excluded,
            )
        if not ies_values:
            ies_mean = ies_sd = float("nan")
        else:
            ies_mean, ies_sd = _mean(ies_values), _sd(ies_values)
        out.append(
            ConditionSummary(
                condition=condition,
                n=len(participants),
                acc_mean=_mean(accs),
                acc_sd=_sd(accs),
                rt_mean=_mean(rts),
                rt_sd=_sd(rts),
                ies_mean=ies_mean,
                ies_sd=ies_sd,
            )
        )
    return out


def welch_t_test(group_a: Sequence[float], group_b: Sequence[float]) -> WelchResult:
    """Welch's unequal-variance t-test with one-tailed p and pooled-sd Cohen's d."""

    na, nb = len(group_a), len(group_b)
    if na < 2 or nb < 2:
        raise ValueError("each group needs at least 2 values")
    ma, mb = _mean(group_a), _mean(group_b)
    va = sum((v - ma) ** 2 for v in group_a) / (na - 1)
    vb = sum((v - mb) ** 2 for v in group_b) / (nb - 1)
    if va == 0 and vb == 0:
        raise ValueError("degenerate variance in both groups")
    sa, sb = va / na, vb / nb
    se = math.sqrt(sa + sb)
    t = (ma - mb) / se
    df = (sa + sb) ** 2 / (sa**2 / (na - 1) + sb**2 / (nb - 1))
    p_one = float(_scipy_stats.t.sf(t, df))
    pooled = math.sqrt(((na - 1) * va + (nb - 1) * vb) / (na + nb - 2))
    d = (ma - mb) / pooled
    return WelchResult(t=t, df=df, p_one_tailed=p_one, cohens_d=d)


def _average_ranks(values: Sequence[float]) -> list[float]:
    order = sorted(range(len(values)), key=lambda i: values[i])
    ranks = [0.0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j < len(order) and values[order[j]] == values[order[i]]:
            j += 1
        avg = (i + j + 1) / 2  # 1-based average rank of the tie group
        for k in range(i, j):
            ranks[order[k]] = avg
        i = j
    return ranks


def spearman(x: Sequence[float], y: Sequence[float]) -> SpearmanResult:
    """Rank correlation with average ranks for ties; t-approximation p-value."""

    if len(x) != len(y):
        raise ValueError("inputs must have equal length")
    n = len(x)
    if n < 3:
        raise ValueError("need at least 3 points")
    if len(set(x)) == 1 or len(set(y)) == 1:
        raise ValueError("undefined correlation for constant input")
    rx, ry = _average_ranks(x), _average_ranks(y)
    mx, my = _mean(rx), _mean(ry)
    cov = sum((a - mx) * (b - my) for a, b in zip(rx, ry))
    sx = math.sqrt(sum((a - mx) ** 2 for a in rx))
    sy = math.sqrt(sum((b - my) ** 2 for b in ry))
    r = cov / (sx * sy)
    r = max(-1.0, min(1.0, r))
    if abs(r) == 1.0:
        return SpearmanResult(r=r, p=0.0)
    t = r * math.sqrt((n - 2) / (1 - r * r))
    p = float(2.0 * _scipy_stats.t.sf(abs(t), n - 2))
    return SpearmanResult(r=r, p=p)


# -- stimulus attributes and correlation report ----------------------------

@dataclass(frozen=True)
class StimulusAttrs:
    """Per-(condition, stimulus) summary attributes used in correlations."""

    condition: str
    stimulus_id: str
    grounding: float
    utility: float
    word_count: int


@dataclass(frozen=True)
class CorrelationRow:
    x_name: str
    y_name: str
    n: int
    r: float
    p: float


def correlation_table(
    records: Sequence[ResponseRecord],
    stimulus_attrs: Sequence[StimulusAttrs],
) -> list[CorrelationRow]:
    """Participant-level correlations between summary attributes and performance.

    Each text-condition participant contributes the mean attribute of their
    condition's stimuli against their accuracy / response time; the video-only
    condition has no summary attributes and is excluded.
    """

    attr_map: dict[tuple[str, str], StimulusAttrs] = {
        (a.condition, a.stimulus_id): a for a in stimulus_attrs
    }
    xs: dict[str, list[float]] = defaultdict(list)
    ys: dict[str, list[float]] = defaultdict(list)

    per_participant: dict[str, list[ResponseRecord]] = defaultdict(list)
    for record in records:
        per_participant[record.participant_id].append(record)

    for recs in per_participant.values():
        metrics = participant_metrics(recs)
        keys = [(r.condition, r.stimulus_id) for r in recs]
        if any(k not in attr_map for k in keys):
            continue
        attrs = [attr_map[k] for k in keys]
        mean_utility = _mean([a.utility for a in attrs])
        mean_grounding = _mean([a.grounding for a in attrs])
        mean_words = _mean([float(a.word_count) for a in attrs])
        total_words = sum(a.word_count for a in attrs)
        rt_per_word = metrics.total_rt / total_words if total_words else float("nan")
        for name, value in (
            ("utility", mean_utility),
            ("grounding", mean_grounding),
            ("word_count", mean_words),
        ):
            xs[f"{name}_vs_accuracy"].append(value)
            ys[f"{name}_vs_accuracy"].append(metrics.accuracy)
            xs[f"{name}_vs_response_time"].append(value)
            ys[f"{name}_vs_response_time"].append(metrics.total_rt)
        xs["word_count_vs_rt_per_word"].append(mean_words)
        ys["word_count_vs_rt_per_word"].append(rt_per_word)

    rows = []
    for key in sorted(xs):
        x_vals, y_vals = xs[key], ys[key]
        x_name, y_name = key.split("_vs_")
        try:
            result = spearman(x_vals, y_vals)
        except ValueError:
            continue
        rows.append(
            CorrelationRow(x_name=x_name, y_name=y_name, n=len(x_vals), r=result.r, p=result.p)
        )
    return rows


# -- exports ---------------------------------------------------------------

def condition_table_to_csv(summaries: Sequence[ConditionSummary]) -> str:
    """Table-style CSV: one metric per row, one condition per column."""

    buf = io.StringIO()
    conditions = [s.condition for s in summaries]
    buf.write("metric," + ",".join(conditions) + "\n")
    rows = (
        ("acc_pct", lambda s: (s.acc_mean, s.acc_sd)),
        ("rt_s", lambda s: (s.rt_mean, s.rt_sd)),
        ("ies", lambda s: (s.ies_mean, s.ies_sd)),
    )
    for name, get in rows:
        cells = []
        for s in summaries:
            mean, sd = get(s)
            cells.append(f"{mean:.2f} ± {sd:.2f}")
        buf.write(name + "," + ",".join(cells) + "\n")
    buf.write("n," + ",".join(str(s.n) for s in summaries) + "\n")
    return buf.getvalue()


def participants_to_csv(records: Sequence[ResponseRecord]) -> str:
    buf = io.StringIO()
    buf.write("participant_id,condition,n_records,accuracy,total_rt_s,ies\n")
    grouped = group_participants(records)
    for condition in CONDITION_ORDER:
        for m in grouped.get(condition, ()):
            ies = "" if m.ies is None else repr(m.ies)
            buf.write(
                f"{m.participant_id},{m.condition},{m.n_records},"
                f"{m.accuracy!r},{m.total_rt!r},{ies}\n"
            )
    return buf.getvalue()


def correlations_to_csv(rows: Sequence[CorrelationRow]) -> str:
    buf = io.StringIO()
    buf.write("x,y,n,spearman_r,p_two_tailed\n")
    for row in rows:
        buf.write(f"{row.x_name},{row.y_name},{row.n},{row.r!r},{row.p!r}\n")
    return buf.getvalue()


def stimulus_attrs_from_dict(d: Mapping[str, object]) -> StimulusAttrs:
    return StimulusAttrs(
        condition=str(d["condition"]),
        stimulus_id=str(d["stimulus_id"]),
        grounding=float(d["grounding"]),  # type: ignore[arg-type]
        utility=float(d["utility"]),  # type: ignore[arg-type]
        word_count=int(d["word_count"]),  # type: ignore[arg-type]
    )
