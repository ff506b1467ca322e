#!/usr/bin/env python3
"""Record the bundled replay fixtures at fixtures/replay/.

Runs the real pipeline against the deterministic scripted model and
captures every exchange into one fixture store. The recorded flows:

  * a base evaluation run (2 instances x N=3 x 8 budgets)
  * a degenerate run (N=1, single checkpoint at the generation limit)
  * a preference-generation run (N=4) plus the PDP evaluation run that
    consumes its rendered prompt

Re-running this script reproduces fixtures.jsonl byte for byte.
"""

from __future__ import annotations

import sys
import tempfile
from pathlib import Path

REPO = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(REPO / "tests"))

from scripted import ScriptedBackend, write_demo_dataset  # noqa: E402

from anytime_eval.gateway import FixtureStore, Gateway  # noqa: E402
from anytime_eval.pipeline import (  # noqa: E402
    DEFAULT_TEMPLATES,
    RunManifest,
    run_evaluation,
    run_prefgen,
)

MODEL = "scripted-demo"
SAMPLING = {"temperature": 0.7, "top_p": 1.0, "top_k": None,
            "max_tokens": 4096, "seed": 0}
TOKENIZER = {"kind": "words", "vocab_file": None, "merges_file": None}


def _manifest(run_id: str, dataset: Path, **overrides) -> RunManifest:
    base = dict(
        run_id=run_id,
        dataset_kind="trip",
        dataset_path=str(dataset),
        model=MODEL,
        endpoint="replay://bundled",
        method="base",
        checkpoints=tuple(range(100, 801, 100)),
        n_traces=3,
        sampling=dict(SAMPLING),
        tokenizer=dict(TOKENIZER),
        templates=dict(DEFAULT_TEMPLATES),
        created_at="2025-01-01T00:00:00+00:00",
    )
    base.update(overrides)
    return RunManifest(**base)


def main() -> None:
    replay_dir = REPO / "fixtures" / "replay"
    replay_dir.mkdir(parents=True, exist_ok=True)

    dataset = replay_dir / "trip_small.jsonl"
    write_demo_dataset(dataset)

    fixtures_path = replay_dir / "fixtures.jsonl"
    if fixtures_path.exists():
        fixtures_path.unlink()
    recorder = Gateway(ScriptedBackend(), store=FixtureStore(fixtures_path))

    # Sequential execution keeps the recorded line order deterministic.
    with tempfile.TemporaryDirectory() as tmp:
        run_evaluation(_manifest("record-base", dataset), recorder, tmp,
                       max_in_flight=1)
        run_evaluation(
            _manifest("record-degenerate", dataset,
                      checkpoints=(4096,), n_traces=1),
            recorder, tmp, max_in_flight=1,
        )
        prefgen_summary = run_prefgen(
            _manifest("record-prefgen", dataset, n_traces=4),
            recorder, tmp, max_pairs=8, max_in_flight=1,
        )
        prompt_file = prefgen_summary["prompt_files"]["pdp"]
        run_evaluation(
            _manifest("record-pdp", dataset, method="pdp", prompt_file=prompt_file),
            recorder, tmp, max_in_flight=1,
        )

    store = FixtureStore(fixtures_path)
    print(f"recorded {len(store)} exchanges to {fixtures_path}")

    (replay_dir / "run.toml").write_text(
        'run_id = "replay-demo"\n'
        'out_dir = "runs"\n'
        'method = "base"\n'
        "\n"
        "[dataset]\n"
        'kind = "trip"\n'
        'path = "fixtures/replay/trip_small.jsonl"\n'
        "\n"
        "[sampling]\n"
        "n_traces = 3\n"
        "seed = 0\n"
        "\n"
        "[endpoint]\n"
        f'model = "{MODEL}"\n'
        'base_url = "replay://bundled"\n',
        encoding="utf-8",
    )
    print(f"wrote {replay_dir / 'run.toml'}")


if __name__ == "__main__":
    main()
