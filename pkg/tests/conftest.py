from __future__ import annotations

import json
from pathlib import Path

import pytest

import vidscore
from vidscore import cli

GOLDEN_DIR = Path(__file__).parent / "golden"

PIPELINE_ARGS = [
    "--root", "fixture",
    "--preset", "fixture",
    "--transport", "mock",
    "--seed", "4",
    "--alpha", "0.5",
    "--beta", "0.5",
]


def run_pipeline(out_dir: Path, stages=("keywords", "mask", "score", "sweep", "report")) -> None:
    for stage in stages:
        code = cli.main([stage, *PIPELINE_ARGS, "--out", str(out_dir)])
        assert code == 0, f"stage {stage} exited {code}"


@pytest.fixture(scope="session")
def fixture_root() -> Path:
    return vidscore.fixture_root()


@pytest.fixture(scope="session")
def fixture_jointspec(fixture_root: Path) -> dict:
    return json.loads((fixture_root / "jointspec.json").read_text(encoding="utf-8"))


@pytest.fixture(scope="session")
def pipeline_out(tmp_path_factory: pytest.TempPathFactory) -> Path:
    out = tmp_path_factory.mktemp("pipeline")
    run_pipeline(out)
    return out
