"""Best-of-k selection, the weighted-sum alpha sweep, and Pareto extraction.

``select_best`` maximizes alpha*grounding + beta*utility over valid cards;
ties break to the lowest candidate_id.  The sweep evaluates 21 convex
weights (alpha from 0 to 1 in steps of 0.05, beta = 1 - alpha).  The front
is computed independently of the sweep: weighted sums cannot reach
non-convex Pareto points, so concave-region candidates would otherwise be
missing from reports.  Invalid cards never participate -- a failed
measurement is not evidence of a bad summary.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from typing import Mapping, Sequence

from vidscore.domain import ScoreCard
from vidscore.svg import Series, scatter_svg

DEFAULT_ALPHAS = tuple(i / 20 for i in range(21))


class NoValidCandidatesError(ValueError):
    pass


@dataclass(frozen=True)
class SelectionConfig:
    alpha: float
    beta: float
    tie_break: str = "lowest_candidate_id"

    def __post_init__(self) -> None:
        if self.alpha < 0 or self.beta < 0:
            raise ValueError("alpha and beta must be >= 0")
        if self.alpha == 0 and self.beta == 0:
            raise ValueError("alpha and beta cannot both be zero")
        if self.tie_break != "lowest_candidate_id":
            raise ValueError(f"unknown tie_break {self.tie_break!r}")


@dataclass(frozen=True)
class SweepPoint:
    alpha: float
    beta: float
    candidate_id: str
    grounding: float
    utility: float


@dataclass(frozen=True)
class SweepResult:
    points: tuple[SweepPoint, ...]
    frontier: tuple[str, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "points", tuple(self.points))
        object.__setattr__(self, "frontier", tuple(self.frontier))
        alphas = [p.alpha for p in self.points]
        if any(a >= b for a, b in zip(alphas, alphas[1:])):
            raise ValueError("sweep alphas must be strictly increasing")


def _valid(cards: Sequence[ScoreCard]) -> list[ScoreCard]:
    kept = [c for c in cards if c.valid]
    if not kept:
        raise NoValidCandidatesError("no valid candidates")
    return kept


def select_best(cards: Sequence[ScoreCard], config: SelectionConfig) -> str:
    """Candidate id maximizing the weighted score over valid cards."""

    best = min(
        _valid(cards),
        key=lambda c: (-(config.alpha * c.grounding + config.beta * c.utility), c.candidate_id),
    )
    return best.candidate_id


def sweep(cards: Sequence[ScoreCard], alphas: Sequence[float] = DEFAULT_ALPHAS) -> SweepResult:
    """One selection per alpha (beta = 1 - alpha); duplicates are retained."""

    by_id = {c.candidate_id: c for c in _valid(cards)}
    points = []
    for alpha in alphas:
        chosen = select_best(cards, SelectionConfig(alpha=alpha, beta=1.0 - alpha))
        card = by_id[chosen]
        points.append(
            SweepPoint(
                alpha=alpha,
                beta=1.0 - alpha,
                candidate_id=chosen,
                grounding=card.grounding,
                utility=card.utility,
            )
        )
    return SweepResult(points=tuple(points), frontier=pareto_front(cards))


def pareto_front(cards: Sequence[ScoreCard]) -> tuple[str, ...]:
    """Ids of non-dominated cards, sorted by grounding ascending.

    A card is dominated when another valid card is at least as good on both
    scores and strictly better on one.  Cards with identical score pairs do
    not dominate each other, so duplicates survive together.
    """

    valid = _valid(cards)
    order = sorted(valid, key=lambda c: (-c.grounding, -c.utility, c.candidate_id))
    front: list[ScoreCard] = []
    best_utility = float("-inf")
    i = 0
    while i < len(order):
        j = i
        while j < len(order) and order[j].grounding == order[i].grounding:
            j += 1
        group_best = order[i].utility  # group sorted by utility descending
        for card in order[i:j]:
            if card.utility == group_best and card.utility > best_utility:
                front.append(card)
        best_utility = max(best_utility, group_best)
        i = j
    front.sort(key=lambda c: (c.grounding, c.candidate_id))
    return tuple(c.candidate_id for c in front)


def sweep_to_csv(result: SweepResult, video_id: str = "") -> str:
    buf = io.StringIO()
    buf.write("video_id,alpha,beta,candidate_id,grounding,utility\n")
    for p in result.points:
        buf.write(
            f"{video_id},{p.alpha:.2f},{p.beta:.2f},{p.candidate_id},"
            f"{p.grounding!r},{p.utility!r}\n"
        )
    return buf.getvalue()


def sweep_to_svg(
    cards: Sequence[ScoreCard],
    result: SweepResult,
    *,
    title: str = "Grounding vs utility",
    highlights: Mapping[str, str] | None = None,
    meta: str = "",
) -> str:
    """Scatter of valid cards with the frontier polyline; highlights are
    candidate_id -> label (e.g. the naive pick, CoT, external summaries)."""

    highlights = dict(highlights or {})
    valid = [c for c in cards if c.valid]
    by_id = {c.candidate_id: c for c in valid}
    plain = [c for c in valid if c.candidate_id not in highlights]
    series = [
        Series(
            name="candidates",
            points=tuple((c.grounding, c.utility) for c in plain),
            color="#4878d0",
        )
    ]
    palette = ("#d65f5f", "#ee854a", "#6acc64", "#956cb4")
    for i, label in enumerate(sorted(set(highlights.values()))):
        ids = sorted(k for k, v in highlights.items() if v == label and k in by_id)
        series.append(
            Series(
                name=label,
                points=tuple((by_id[k].grounding, by_id[k].utility) for k in ids),
                color=palette[i % len(palette)],
                radius=5.0,
            )
        )
    frontier_pts = tuple(
        (by_id[cid].grounding, by_id[cid].utility) for cid in result.frontier if cid in by_id
    )
    return scatter_svg(
        series,
        title=title,
        x_label="grounding (nats)",
        y_label="utility (nats)",
        polylines=(frontier_pts,) if len(frontier_pts) > 1 else (),
        meta=meta,
    )
