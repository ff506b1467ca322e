import json
from pathlib import Path

import pytest

REPO = Path(__file__).resolve().parents[1]
FIXTURES = REPO / "fixtures"


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture(scope="session")
def trip_corpus() -> list[dict]:
    path = FIXTURES / "trip_corpus.jsonl"
    return [json.loads(line) for line in path.read_text(encoding="utf-8").splitlines()]


@pytest.fixture(scope="session")
def replay_store_path() -> Path:
    return FIXTURES / "replay" / "fixtures.jsonl"


@pytest.fixture()
def replay_backend(replay_store_path):
    from anytime_eval.gateway import FixtureStore, ReplayBackend

    return ReplayBackend(FixtureStore(replay_store_path))


def make_trip_manifest(run_id: str, **overrides):
    """Manifest matching the bundled replay fixtures."""
    from anytime_eval.pipeline import DEFAULT_TEMPLATES, RunManifest

    base = dict(
        run_id=run_id,
        dataset_kind="trip",
        dataset_path=str(FIXTURES / "replay" / "trip_small.jsonl"),
        model="scripted-demo",
        endpoint="replay://bundled",
        method="base",
        checkpoints=tuple(range(100, 801, 100)),
        n_traces=3,
        sampling={"temperature": 0.7, "top_p": 1.0, "top_k": None,
                  "max_tokens": 4096, "seed": 0},
        tokenizer={"kind": "words", "vocab_file": None, "merges_file": None},
        templates=dict(DEFAULT_TEMPLATES),
        created_at="2025-01-01T00:00:00+00:00",
    )
    base.update(overrides)
    return RunManifest(**base)
