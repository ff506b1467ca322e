"""The full evaluation pipeline, offline, against the bundled fixtures.

Replays a recorded two-instance run: sample 3 traces per instance, cut each
at 8 budgets, force an answer from every prefix, score by constraint
satisfaction, and aggregate into an anytime summary. No network involved;
running this twice produces byte-identical results.

Run from the repository root:  python demos/05_offline_pipeline.py
"""

import tempfile
from pathlib import Path

from anytime_eval import FixtureStore, ReplayBackend, run_evaluation
from anytime_eval.pipeline import DEFAULT_TEMPLATES, RunManifest
from anytime_eval.report import build_table, format_table

backend = ReplayBackend(FixtureStore("fixtures/replay/fixtures.jsonl"))

manifest = RunManifest(
    run_id="demo-offline",
    dataset_kind="trip",
    dataset_path="fixtures/replay/trip_small.jsonl",
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

with tempfile.TemporaryDirectory() as tmp:
    summary = run_evaluation(manifest, backend, tmp)

    print(f"\nscored {summary['cells_ok']} cells "
          f"({summary['n_instances']} instances x {summary['n_traces']} traces "
          f"x {len(summary['checkpoints'])} budgets)\n")
    print("mean quality per budget:")
    for cell in summary["per_budget"]:
        bar = "#" * round(cell["mean_quality"] * 40)
        print(f"  {cell['budget']:>4} tokens  {cell['mean_quality']:.3f}  {bar}")

    print(f"\nfinal={summary['final']:.3f}  average={summary['average']:.3f}  "
          f"anytime={summary['anytime_index']:.3f}")

    print("\nrun directory layout:")
    for path in sorted(Path(tmp, "demo-offline").iterdir()):
        print(f"  {path.name}")

    print("\nas a report table:")
    print(format_table(build_table([summary])))
