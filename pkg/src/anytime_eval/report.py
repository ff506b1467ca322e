"""Cross-run report tables and plot-ready curve CSVs.

Reports are pure functions of persisted run summaries: regenerating one
never touches the network. Scores are stored in [0, 1] everywhere and
scaled to percentages only here, at render time.
"""

from __future__ import annotations

import csv
import json
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .metrics import BudgetSchedule, QualityCurve, anytime_index

log = logging.getLogger(__name__)

_TRIPLE = ("final", "average", "anytime_index")


@dataclass(frozen=True)
class ReportRow:
    model: str
    method: str
    per_dataset: dict[str, dict]  # dataset kind -> {final, average, anytime_index}
    overall: dict  # macro-average of the datasets present


@dataclass(frozen=True)
class ReportTable:
    rows: tuple[ReportRow, ...]
    datasets: tuple[str, ...]
    q_max_mode: str


def load_summaries(runs_dir: str | Path) -> list[dict]:
    """All summary.json files under ``runs_dir`` (recursively)."""
    paths = sorted(Path(runs_dir).glob("**/summary.json"))
    if not paths:
        raise ValueError(f"no summary.json files found under {runs_dir}")
    return [json.loads(p.read_text(encoding="utf-8")) for p in paths]


def _shared_q_max(summaries: list[dict]) -> float:
    """Largest per-budget mean across all compared methods (floor 1e-9)."""
    top = 0.0
    for s in summaries:
        for cell in s["per_budget"]:
            if cell["mean_quality"] is not None:
                top = max(top, cell["mean_quality"])
    return top if top > 0 else 1.0


def _recompute_index(summary: dict, q_max: float) -> float | None:
    means = [cell["mean_quality"] for cell in summary["per_budget"]]
    if any(m is None for m in means) or len(means) < 2:
        return None
    curve = QualityCurve(BudgetSchedule(summary["checkpoints"]), means)
    return anytime_index(curve, q_max)


def build_table(summaries: list[dict], q_max_mode: str = "fixed") -> ReportTable:
    """Group summaries by (model, method) and macro-average across datasets.

    ``q_max_mode="shared"`` renormalizes every anytime index by the largest
    per-budget mean observed across all compared methods on that dataset.
    """
    if not summaries:
        raise ValueError("no summaries to report")
    if q_max_mode not in ("fixed", "shared"):
        raise ValueError(f"q_max_mode must be 'fixed' or 'shared', got {q_max_mode!r}")

    datasets = sorted({s["dataset_kind"] for s in summaries})

    if q_max_mode == "shared":
        shared = {
            kind: _shared_q_max([s for s in summaries if s["dataset_kind"] == kind])
            for kind in datasets
        }

    # (model, method, dataset) -> list of triples; repeated runs are averaged.
    cells: dict[tuple[str, str, str], list[dict]] = {}
    for s in summaries:
        triple = {
            "final": s["final"],
            "average": s["average"],
            "anytime_index": (
                _recompute_index(s, shared[s["dataset_kind"]])
                if q_max_mode == "shared" else s["anytime_index"]
            ),
        }
        cells.setdefault((s["model"], s["method"], s["dataset_kind"]), []).append(triple)

    rows: list[ReportRow] = []
    for model, method in sorted({(m, me) for m, me, _ in cells}):
        per_dataset: dict[str, dict] = {}
        for kind in datasets:
            triples = cells.get((model, method, kind))
            if not triples:
                continue
            if len(triples) > 1:
                log.info("%s/%s/%s: averaging %d runs", model, method, kind, len(triples))
            per_dataset[kind] = {
                k: _mean_or_none([t[k] for t in triples]) for k in _TRIPLE
            }
        overall = {
            k: _mean_or_none([per_dataset[kind][k] for kind in per_dataset])
            for k in _TRIPLE
        }
        rows.append(ReportRow(model, method, per_dataset, overall))

    return ReportTable(tuple(rows), tuple(datasets), q_max_mode)


def _mean_or_none(values: list) -> float | None:
    present = [v for v in values if v is not None]
    return float(np.mean(present)) if present else None


def _pct(value: float | None) -> str:
    return f"{100 * value:.1f}" if value is not None else "-"


def format_table(table: ReportTable) -> str:
    """Human-readable table; values are percentages with one decimal."""
    headers = ["Model", "Method"]
    for kind in table.datasets:
        headers += [f"{kind}:Final", f"{kind}:Avg", f"{kind}:Anytime"]
    headers += ["Overall:Final", "Overall:Avg", "Overall:Anytime"]

    body: list[list[str]] = []
    for row in table.rows:
        line = [row.model, row.method]
        for kind in table.datasets:
            triple = row.per_dataset.get(kind)
            line += [_pct(triple[k]) if triple else "-" for k in _TRIPLE]
        line += [_pct(row.overall[k]) for k in _TRIPLE]
        body.append(line)

    widths = [max(len(h), *(len(r[i]) for r in body)) if body else len(h)
              for i, h in enumerate(headers)]
    fmt = "  ".join(f"{{:<{w}}}" for w in widths)
    lines = [fmt.format(*headers), fmt.format(*["-" * w for w in widths])]
    lines += [fmt.format(*row) for row in body]
    lines.append(f"(q_max mode: {table.q_max_mode})")
    return "\n".join(lines)


def emit_report(summaries: list[dict], out_dir: str | Path | None = None,
                q_max_mode: str = "fixed") -> ReportTable:
    """Build the table and, when ``out_dir`` is given, write CSV artifacts.

    Writes ``report.csv`` (one row per model/method/dataset plus overall)
    and one ``curve_<dataset>.csv`` of per-budget means, sorted by
    (model, method, budget), ready for external plotting.
    """
    table = build_table(summaries, q_max_mode)
    if out_dir is None:
        return table

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    with (out / "report.csv").open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["model", "method", "dataset", "final_pct", "avg_pct",
                         "anytime_index_pct", "q_max_mode"])
        for row in table.rows:
            for kind in table.datasets:
                triple = row.per_dataset.get(kind)
                if triple:
                    writer.writerow([row.model, row.method, kind,
                                     *(_pct(triple[k]) for k in _TRIPLE),
                                     table.q_max_mode])
            writer.writerow([row.model, row.method, "overall",
                             *(_pct(row.overall[k]) for k in _TRIPLE),
                             table.q_max_mode])

    by_dataset: dict[str, list[tuple]] = {}
    for s in summaries:
        for cell in s["per_budget"]:
            by_dataset.setdefault(s["dataset_kind"], []).append(
                (s["model"], s["method"], cell["budget"], cell["mean_quality"])
            )
    for kind, rows in by_dataset.items():
        with (out / f"curve_{kind}.csv").open("w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["model", "method", "budget", "mean_quality"])
            for entry in sorted(rows, key=lambda r: r[:3]):
                writer.writerow(entry)

    (out / "report.txt").write_text(format_table(table) + "\n", encoding="utf-8")
    return table
