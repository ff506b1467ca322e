"""End-to-end evaluation and preference-generation runs.

A run samples N reasoning traces per instance, cuts each trace at every
budget checkpoint, re-prompts for an answer from each cut, scores the
answers, and aggregates per-budget means into an anytime summary. All
state lives in plain files under one run directory:

    manifest.json    immutable run description (hashed; edits refuse resume)
    exchanges.jsonl  every request/response, verbatim, append-only
    rows.jsonl       header line + one scored cell per line, append-only
    summary.json     aggregate + per-trace anytime summaries
    prompts/         rendered preference prompts (prefgen runs)

Interrupted runs resume from the files alone: recorded exchanges are
replayed instead of re-sampled, completed cells are never re-executed,
and the final summary is identical to an uninterrupted run.
"""

from __future__ import annotations

import datetime as _dt
import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .datasets import Instance, QualityScorer, load_instances
from .gateway import Backend, ChatRequest, FixtureStore, Gateway, Message, SamplingParams
from .jsonutil import canonical_json, sha256_hex
from .metrics import BudgetSchedule, QualityCurve, anytime_index
from .preference import (
    PdpPromptConfig,
    ScoredTraceAtBudget,
    TARGET_PLACEHOLDER,
    render_pdp_plus_prompt,
    render_pdp_prompt,
    select_pairs_across_queries,
    write_pairs_jsonl,
)
from .tokenization import TokenizerSpec, truncate_prefix

log = logging.getLogger(__name__)

METHODS = ("base", "pdp", "pdp_plus")

DEFAULT_TEMPLATES = {
    "version": "v1",
    "trace_system": "You are a careful problem solver. Reason step by step.",
    "trace_user": "{question}\n\nThink step by step.",
    "answer_system": (
        "You are finalizing an interrupted solution. Use only the reasoning "
        "already provided; do not continue reasoning."
    ),
    "answer_user": "{question}\n\nReasoning so far:\n{prefix}\n\n{instruction}",
    "answer_instruction_trip": (
        "Output the final trip itinerary now, one line per stay in the form "
        "'Day X-Y: CityName'."
    ),
    "answer_instruction_aime": "State the final answer now as 'Answer: <integer>'.",
    "answer_instruction_gpqa": "State the final answer now as 'Answer: <letter>'.",
}


class RunIntegrityError(RuntimeError):
    """Run directory contents disagree with the manifest."""


@dataclass(frozen=True)
class RunManifest:
    """Immutable description of one run; every persisted row references it."""

    run_id: str
    dataset_kind: str
    dataset_path: str
    model: str
    endpoint: str
    method: str
    checkpoints: tuple[int, ...]
    n_traces: int
    sampling: dict
    tokenizer: dict
    templates: dict
    dataset_split: str = ""
    prompt_file: str | None = None
    pairs_file: str | None = None
    limit: int | None = None
    created_at: str = ""
    code_version: str = __version__

    def __post_init__(self) -> None:
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}, got {self.method!r}")
        if self.n_traces < 1:
            raise ValueError(f"n_traces must be >= 1, got {self.n_traces}")
        BudgetSchedule(self.checkpoints)  # validates ordering
        if self.method != "base" and not self.prompt_file:
            raise ValueError(f"method {self.method!r} needs a prompt_file")

    def as_dict(self) -> dict:
        return {
            "run_id": self.run_id,
            "dataset_kind": self.dataset_kind,
            "dataset_path": self.dataset_path,
            "dataset_split": self.dataset_split,
            "model": self.model,
            "endpoint": self.endpoint,
            "method": self.method,
            "checkpoints": list(self.checkpoints),
            "n_traces": self.n_traces,
            "sampling": self.sampling,
            "tokenizer": self.tokenizer,
            "templates": self.templates,
            "prompt_file": self.prompt_file,
            "pairs_file": self.pairs_file,
            "limit": self.limit,
            "created_at": self.created_at,
            "code_version": self.code_version,
        }

    def content_sha(self) -> str:
        """Hash of the run-defining fields; creation time excluded."""
        d = self.as_dict()
        d.pop("created_at")
        return sha256_hex(canonical_json(d))

    @classmethod
    def from_dict(cls, d: dict) -> "RunManifest":
        return cls(
            run_id=d["run_id"],
            dataset_kind=d["dataset_kind"],
            dataset_path=d["dataset_path"],
            dataset_split=d.get("dataset_split", ""),
            model=d["model"],
            endpoint=d["endpoint"],
            method=d["method"],
            checkpoints=tuple(d["checkpoints"]),
            n_traces=d["n_traces"],
            sampling=d["sampling"],
            tokenizer=d["tokenizer"],
            templates=d["templates"],
            prompt_file=d.get("prompt_file"),
            pairs_file=d.get("pairs_file"),
            limit=d.get("limit"),
            created_at=d.get("created_at", ""),
            code_version=d.get("code_version", ""),
        )


def now_iso() -> str:
    return _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")


# ---------------------------------------------------------------------------
# Prompt construction


def _trace_request(manifest: RunManifest, instance: Instance, trace_index: int,
                   prompt_template: str | None) -> ChatRequest:
    templates = manifest.templates
    if manifest.method == "base":
        user = templates["trace_user"].format(question=instance.question)
    else:
        user = prompt_template.replace(TARGET_PLACEHOLDER, instance.question)
    params = _trace_params(manifest, trace_index)
    return ChatRequest(
        model=manifest.model,
        messages=(
            Message("system", templates["trace_system"]),
            Message("user", user),
        ),
        params=params,
    )


def _trace_params(manifest: RunManifest, trace_index: int) -> SamplingParams:
    # Each trace gets its own seed so the N samples are distinct requests;
    # record/replay would otherwise collapse them into one fixture.
    base = manifest.sampling.get("seed") or 0
    return SamplingParams(
        temperature=manifest.sampling["temperature"],
        top_p=manifest.sampling["top_p"],
        top_k=manifest.sampling.get("top_k"),
        max_tokens=manifest.sampling["max_tokens"],
        seed=base + trace_index,
    )


def _answer_request(manifest: RunManifest, instance: Instance, prefix_text: str) -> ChatRequest:
    templates = manifest.templates
    instruction = templates[f"answer_instruction_{manifest.dataset_kind}"]
    user = templates["answer_user"].format(
        question=instance.question, prefix=prefix_text, instruction=instruction
    )
    params = SamplingParams(
        temperature=manifest.sampling["temperature"],
        top_p=manifest.sampling["top_p"],
        top_k=manifest.sampling.get("top_k"),
        max_tokens=manifest.sampling["max_tokens"],
        seed=manifest.sampling.get("seed") or 0,
    )
    return ChatRequest(
        model=manifest.model,
        messages=(
            Message("system", templates["answer_system"]),
            Message("user", user),
        ),
        params=params,
    )


# ---------------------------------------------------------------------------
# Run directory plumbing


def run_paths(run_dir: Path) -> dict[str, Path]:
    return {
        "manifest": run_dir / "manifest.json",
        "rows": run_dir / "rows.jsonl",
        "exchanges": run_dir / "exchanges.jsonl",
        "summary": run_dir / "summary.json",
        "prompts": run_dir / "prompts",
    }


def prepare_run_dir(out_dir: Path, manifest: RunManifest) -> Path:
    """Create (or re-enter) the run directory for ``manifest``."""
    run_dir = Path(out_dir) / manifest.run_id
    manifest_path = run_paths(run_dir)["manifest"]
    if manifest_path.exists():
        existing = load_manifest(run_dir)
        if existing.content_sha() != manifest.content_sha():
            raise RunIntegrityError(
                f"run directory {run_dir} already holds a different manifest; "
                "manifests are immutable once written"
            )
        return run_dir
    run_dir.mkdir(parents=True, exist_ok=True)
    manifest_path.write_text(
        json.dumps(manifest.as_dict(), indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )
    return run_dir


def load_manifest(run_dir: Path) -> RunManifest:
    path = run_paths(Path(run_dir))["manifest"]
    return RunManifest.from_dict(json.loads(path.read_text(encoding="utf-8")))


class RowsWriter:
    """Append-only result rows, one canonical-JSON line each."""

    def __init__(self, path: Path, header: dict) -> None:
        self.path = path
        if not path.exists():
            path.write_text(canonical_json(header) + "\n", encoding="utf-8")
        self._fh = path.open("a", encoding="utf-8")

    def append(self, row: dict) -> None:
        self._fh.write(canonical_json(row) + "\n")
        self._fh.flush()

    def close(self) -> None:
        self._fh.close()


def _rows_header(manifest: RunManifest) -> dict:
    return {
        "kind": "header",
        "run_id": manifest.run_id,
        "manifest_sha256": manifest.content_sha(),
    }


def read_rows(run_dir: Path, manifest: RunManifest) -> list[dict]:
    """Rows recorded so far; refuses files whose header disagrees with the manifest."""
    path = run_paths(run_dir)["rows"]
    if not path.exists():
        return []
    lines = path.read_text(encoding="utf-8").splitlines()
    if not lines:
        return []
    header = json.loads(lines[0])
    if header.get("kind") != "header":
        raise RunIntegrityError(f"{path} has no header line")
    if header.get("manifest_sha256") != manifest.content_sha():
        raise RunIntegrityError(
            f"{path} was written under a different manifest "
            "(the manifest file has been edited); refusing to resume"
        )
    if header.get("run_id") != manifest.run_id:
        raise RunIntegrityError(f"{path} belongs to run {header.get('run_id')!r}")
    return [json.loads(line) for line in lines[1:] if line.strip()]


def _cell_key(row: dict) -> tuple[str, int, int]:
    return (row["instance_id"], row["trace_index"], row["budget"])


# ---------------------------------------------------------------------------
# Core execution


def _execute(manifest: RunManifest, backend: Backend, run_dir: Path,
             max_in_flight: int, q_max: float) -> dict:
    paths = run_paths(run_dir)
    store = FixtureStore(paths["exchanges"])
    gw = Gateway(backend, store=store, reuse_recorded=True)

    instances = load_instances(manifest.dataset_path, manifest.dataset_kind,
                               manifest.limit)
    tokenizer = TokenizerSpec(**manifest.tokenizer).load()
    prompt_template = None
    if manifest.method != "base":
        prompt_template = Path(manifest.prompt_file).read_text(encoding="utf-8")
        if TARGET_PLACEHOLDER not in prompt_template:
            raise RunIntegrityError(
                f"prompt file {manifest.prompt_file} lacks {TARGET_PLACEHOLDER}"
            )

    done: dict[tuple[str, int, int], dict] = {}
    for row in read_rows(run_dir, manifest):
        done[_cell_key(row)] = row
    writer = RowsWriter(paths["rows"], _rows_header(manifest))

    checkpoints = manifest.checkpoints
    scorers = {inst.id: QualityScorer(manifest.dataset_kind, inst) for inst in instances}

    # Phase A: sample every trace that still has missing cells, concurrently.
    trace_jobs: list[tuple[int, int]] = []
    for i, inst in enumerate(instances):
        for t in range(manifest.n_traces):
            if any((inst.id, t, b) not in done for b in checkpoints):
                trace_jobs.append((i, t))
    trace_requests = [
        _trace_request(manifest, instances[i], t, prompt_template)
        for i, t in trace_jobs
    ]
    log.info("run %s: %d instances, %d trace samples to fetch",
             manifest.run_id, len(instances), len(trace_requests))
    trace_results = dict(zip(
        trace_jobs, gw.iter_complete(trace_requests, max_in_flight)
    ))

    # Phase B: cut each trace at every checkpoint, force an answer, score.
    try:
        for i, inst in enumerate(instances):
            scorer = scorers[inst.id]
            for t in range(manifest.n_traces):
                missing = [b for b in checkpoints if (inst.id, t, b) not in done]
                if not missing:
                    continue
                exchange = trace_results[(i, t)]
                if not exchange.ok:
                    for b in missing:
                        row = _row(manifest, inst.id, t, b, status="failed",
                                   trace_key=exchange.request.key,
                                   error=f"trace sampling failed: {exchange.error}")
                        writer.append(row)
                        done[_cell_key(row)] = row
                    continue
                trace_text = exchange.text or ""
                cells = []
                for b in missing:
                    prefix = truncate_prefix(trace_text, b, tokenizer)
                    cells.append((b, prefix, _answer_request(manifest, inst, prefix.text)))
                answer_stream = gw.iter_complete([c[2] for c in cells], max_in_flight)
                for (b, prefix, request), answer in zip(cells, answer_stream):
                    if answer.ok:
                        quality = scorer.score(answer.text or "")
                        row = _row(manifest, inst.id, t, b, status="ok",
                                   prefix_sha256=sha256_hex(prefix.text),
                                   token_count=prefix.token_count,
                                   exhausted=prefix.exhausted,
                                   answer_text=answer.text,
                                   quality=quality,
                                   trace_key=exchange.request.key,
                                   answer_key=request.key)
                    else:
                        row = _row(manifest, inst.id, t, b, status="failed",
                                   prefix_sha256=sha256_hex(prefix.text),
                                   token_count=prefix.token_count,
                                   exhausted=prefix.exhausted,
                                   trace_key=exchange.request.key,
                                   answer_key=request.key,
                                   error=f"answer request failed: {answer.error}")
                    writer.append(row)
                    done[_cell_key(row)] = row
    finally:
        writer.close()

    summary = summarize_rows(manifest, list(done.values()),
                             n_instances=len(instances), q_max=q_max)
    paths["summary"].write_text(canonical_json(summary) + "\n", encoding="utf-8")
    return summary


def _row(manifest: RunManifest, instance_id: str, trace_index: int, budget: int,
         status: str, prefix_sha256: str | None = None,
         token_count: int | None = None, exhausted: bool | None = None,
         answer_text: str | None = None, quality: float | None = None,
         trace_key: str | None = None, answer_key: str | None = None,
         error: str | None = None) -> dict:
    return {
        "run_id": manifest.run_id,
        "instance_id": instance_id,
        "trace_index": trace_index,
        "budget": budget,
        "status": status,
        "prefix_sha256": prefix_sha256,
        "token_count": token_count,
        "exhausted": exhausted,
        "answer_text": answer_text,
        "quality": quality,
        "trace_key": trace_key,
        "answer_key": answer_key,
        "error": error,
    }


def summarize_rows(manifest: RunManifest, rows: Sequence[dict],
                   n_instances: int | None = None, q_max: float = 1.0) -> dict:
    """Aggregate persisted rows into the run summary.

    Pure function of (manifest, rows): a summary can always be recomputed
    offline from the run directory. Failed cells are excluded from the
    per-budget means and reported in the failure counts.
    """
    checkpoints = manifest.checkpoints
    ordered = sorted(rows, key=lambda r: (r["instance_id"], r["trace_index"], r["budget"]))
    ok_rows = [r for r in ordered if r["status"] == "ok"]
    failed = [r for r in ordered if r["status"] != "ok"]

    by_budget: dict[int, list[float]] = {b: [] for b in checkpoints}
    for r in ok_rows:
        if r["budget"] in by_budget:
            by_budget[r["budget"]].append(r["quality"])

    per_budget = []
    means: list[float | None] = []
    for b in checkpoints:
        vals = by_budget[b]
        mean = float(np.mean(vals)) if vals else None
        means.append(mean)
        per_budget.append({
            "budget": b,
            "mean_quality": mean,
            "n_ok": len(vals),
            "n_failed": sum(1 for r in failed if r["budget"] == b),
        })

    final = average = index = None
    if all(m is not None for m in means):
        schedule = BudgetSchedule(checkpoints)
        curve = QualityCurve(schedule, means)
        final = curve.scores[-1]
        average = float(np.mean(curve.scores))
        index = anytime_index(curve, q_max) if len(checkpoints) >= 2 else None

    traces = []
    by_trace: dict[tuple[str, int], dict[int, float]] = {}
    for r in ok_rows:
        by_trace.setdefault((r["instance_id"], r["trace_index"]), {})[r["budget"]] = r["quality"]
    for (iid, t), scores in sorted(by_trace.items()):
        if set(scores) != set(checkpoints):
            continue  # incomplete trace: no curve
        vals = [scores[b] for b in checkpoints]
        traces.append({
            "instance_id": iid,
            "trace_index": t,
            "final": vals[-1],
            "average": float(np.mean(vals)),
            "anytime_index": (
                anytime_index(QualityCurve(BudgetSchedule(checkpoints), vals), q_max)
                if len(checkpoints) >= 2 else None
            ),
        })

    if n_instances is None:
        n_instances = len({r["instance_id"] for r in ordered})

    return {
        "run_id": manifest.run_id,
        "dataset_kind": manifest.dataset_kind,
        "dataset_path": manifest.dataset_path,
        "model": manifest.model,
        "method": manifest.method,
        "checkpoints": list(checkpoints),
        "n_traces": manifest.n_traces,
        "n_instances": n_instances,
        "q_max": q_max,
        "q_max_mode": "fixed",
        "per_budget": per_budget,
        "final": final,
        "average": average,
        "anytime_index": index,
        "cells_total": n_instances * manifest.n_traces * len(checkpoints),
        "cells_ok": len(ok_rows),
        "cells_failed": len(failed),
        "instances_with_failures": sorted({r["instance_id"] for r in failed}),
        "traces": traces,
    }


# ---------------------------------------------------------------------------
# Public entry points


def run_evaluation(manifest: RunManifest, backend: Backend, out_dir: str | Path,
                   max_in_flight: int = 4, q_max: float = 1.0) -> dict:
    """Execute the full evaluation pipeline; returns the written summary."""
    run_dir = prepare_run_dir(Path(out_dir), manifest)
    return _execute(manifest, backend, run_dir, max_in_flight, q_max)


def resume_run(run_dir: str | Path, backend: Backend,
               max_in_flight: int = 4, q_max: float = 1.0) -> dict:
    """Complete the missing cells of a previously started run.

    Completed cells are never re-executed; trace samples recorded in the
    run's exchange log are replayed rather than re-drawn, so the final
    summary matches an uninterrupted run over the same fixtures.
    """
    run_dir = Path(run_dir)
    manifest = load_manifest(run_dir)
    if manifest.code_version != __version__:
        raise RunIntegrityError(
            f"run was created by code version {manifest.code_version}, "
            f"this is {__version__}; refusing to resume"
        )
    return _execute(manifest, backend, run_dir, max_in_flight, q_max)


_SCORING_BLURBS = {
    "trip": ("CSR", "CSR = (# satisfied constraints) / (total constraints)."),
    "aime": ("Accuracy", "Accuracy = 1 if the final answer matches the reference solution, else 0."),
    "gpqa": ("Accuracy", "Accuracy = 1 if the final answer matches the reference solution, else 0."),
}


def run_prefgen(manifest: RunManifest, backend: Backend, out_dir: str | Path,
                max_pairs: int = 8, max_in_flight: int = 4,
                metric_name: str | None = None,
                scoring_blurb: str | None = None) -> dict:
    """Score a trace pool per budget and emit preference pairs + prompts.

    Runs the evaluation inner loop (normally with a larger trace pool over
    a handful of seed examples), then selects the widest-gap pair per
    budget and renders the contrastive and exemplars-only prompt files.
    """
    run_dir = prepare_run_dir(Path(out_dir), manifest)
    summary = _execute(manifest, backend, run_dir, max_in_flight, q_max=1.0)

    instances = load_instances(manifest.dataset_path, manifest.dataset_kind,
                               manifest.limit)
    tokenizer = TokenizerSpec(**manifest.tokenizer).load()
    store = FixtureStore(run_paths(run_dir)["exchanges"])
    gw = Gateway(backend, store=store, reuse_recorded=True)
    rows = read_rows(run_dir, manifest)
    quality: dict[tuple[str, int, int], float] = {
        _cell_key(r): r["quality"] for r in rows if r["status"] == "ok"
    }

    prompt_template = None
    if manifest.method != "base":
        prompt_template = Path(manifest.prompt_file).read_text(encoding="utf-8")

    per_query: dict[str, tuple[str, list[ScoredTraceAtBudget], int | None]] = {}
    for i, inst in enumerate(instances):
        scorer = QualityScorer(manifest.dataset_kind, inst)
        scored: list[ScoredTraceAtBudget] = []
        for t in range(manifest.n_traces):
            exchange = gw.complete(_trace_request(manifest, inst, t, prompt_template))
            trace_text = exchange.text or ""
            for b in manifest.checkpoints:
                q = quality.get((inst.id, t, b))
                if q is None:
                    continue
                prefix = truncate_prefix(trace_text, b, tokenizer)
                scored.append(ScoredTraceAtBudget(
                    trace_id=f"{inst.id}#{t}",
                    budget=b,
                    prefix_text=prefix.text,
                    quality=q,
                ))
        per_query[inst.id] = (inst.question, scored, scorer.total_constraints)

    schedule = BudgetSchedule(manifest.checkpoints)
    pairs = select_pairs_across_queries(per_query, schedule, max_pairs=max_pairs)

    default_metric, default_blurb = _SCORING_BLURBS[manifest.dataset_kind]
    metric = metric_name or default_metric
    blurb = scoring_blurb or default_blurb

    paths = run_paths(run_dir)
    paths["prompts"].mkdir(exist_ok=True)
    pairs_path = run_dir / "pairs.jsonl"
    write_pairs_jsonl(pairs, pairs_path)

    rendered = {}
    if pairs:
        pdp_cfg = PdpPromptConfig(mode="pdp", metric_name=metric, scoring_blurb=blurb)
        plus_cfg = PdpPromptConfig(mode="pdp_plus", metric_name=metric, scoring_blurb=blurb)
        rendered["pdp"] = paths["prompts"] / "pdp.txt"
        rendered["pdp"].write_text(
            render_pdp_prompt(pdp_cfg, pairs, TARGET_PLACEHOLDER), encoding="utf-8")
        rendered["pdp_plus"] = paths["prompts"] / "pdp_plus.txt"
        rendered["pdp_plus"].write_text(
            render_pdp_plus_prompt(plus_cfg, pairs, TARGET_PLACEHOLDER), encoding="utf-8")
    else:
        log.warning("prefgen produced no pairs: every budget was skipped")

    summary["pairs_file"] = str(pairs_path)
    summary["n_pairs"] = len(pairs)
    summary["prompt_files"] = {k: str(v) for k, v in rendered.items()}
    paths["summary"].write_text(canonical_json(summary) + "\n", encoding="utf-8")
    return summary
