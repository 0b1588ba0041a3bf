"""Information-theoretic scoring and best-of-k selection of video summaries.

Pipeline: ingest a dataset of frames/tasks/candidates, mask keywords in
candidate texts and regions in frames, score each candidate's grounding
(video alignment) and utility (task usefulness) from four teacher-forced
VLM calls, then pick the best candidate by a weighted sum or sweep the
weights and extract the Pareto front.  A statistics module reproduces the
human-study analytics (accuracy, response time, inverse efficiency,
Welch t-tests, Spearman correlations) on response records.
"""

from importlib import resources
from pathlib import Path

from vidscore.domain import (
    MASK_TOKEN,
    MaskPlan,
    MaskedText,
    ResponseRecord,
    ScoreCard,
    SummaryCandidate,
    TaskInstance,
    VideoManifest,
    validate_manifest,
    validate_scorecard,
)

__version__ = "0.1.0"


def data_path(*parts: str) -> Path:
    """Filesystem path of a bundled data file."""

    return Path(str(resources.files("vidscore").joinpath("data", *parts)))


def fixture_root() -> Path:
    """Root directory of the bundled mock fixture dataset."""

    return data_path("fixture")


__all__ = [
    "MASK_TOKEN",
    "MaskPlan",
    "MaskedText",
    "ResponseRecord",
    "ScoreCard",
    "SummaryCandidate",
    "TaskInstance",
    "VideoManifest",
    "validate_manifest",
    "validate_scorecard",
    "data_path",
    "fixture_root",
    "__version__",
]
