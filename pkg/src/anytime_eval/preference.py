"""Self-generated preference pairs and the contrastive prompts built from them.

At each token budget, sampled traces are ranked by their quality score; the
widest-gap (best, worst) pair per budget becomes an in-context exemplar.
Rendering produces either the full contrastive prompt (good and poor
reasoning side by side) or the exemplars-only variant. Prompts never include
the downstream solutions produced from the traces, only the truncated
reasoning prefixes themselves.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .metrics import BudgetSchedule

log = logging.getLogger(__name__)

TARGET_PLACEHOLDER = "[TARGET_QUERY]"


@dataclass(frozen=True)
class ScoredTraceAtBudget:
    """One trace's truncated prefix and its quality score at one budget."""

    trace_id: str
    budget: int
    prefix_text: str
    quality: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.quality <= 1.0:
            raise ValueError(f"quality must be in [0, 1], got {self.quality}")


@dataclass(frozen=True)
class PreferencePair:
    """A same-budget (preferred, rejected) trace pair with a positive gap."""

    budget: int
    query_text: str
    preferred: ScoredTraceAtBudget
    rejected: ScoredTraceAtBudget
    gap: float
    query_id: str = ""
    total_constraints: int | None = None  # drives the "Satisfied: k/n" line

    def __post_init__(self) -> None:
        if self.preferred.budget != self.budget or self.rejected.budget != self.budget:
            raise ValueError("both sides of a pair must share the pair's budget")
        if self.preferred.quality <= self.rejected.quality:
            raise ValueError(
                f"preferred quality {self.preferred.quality} must exceed "
                f"rejected quality {self.rejected.quality}"
            )
        expected = self.preferred.quality - self.rejected.quality
        if not math.isclose(self.gap, expected, rel_tol=0, abs_tol=1e-12):
            raise ValueError(f"gap {self.gap} != quality difference {expected}")


@dataclass(frozen=True)
class PdpPromptConfig:
    """Rendering options for preference-data prompts."""

    mode: str  # "pdp" | "pdp_plus"
    metric_name: str = "CSR"
    scoring_blurb: str = "CSR = (# satisfied constraints) / (total constraints)."
    omit_intermediate_solutions: bool = True

    def __post_init__(self) -> None:
        if self.mode not in ("pdp", "pdp_plus"):
            raise ValueError(f"unknown prompt mode {self.mode!r}")
        if not self.omit_intermediate_solutions:
            raise ValueError("intermediate solutions are never included in prompts")


def rank_at_budget(
    scored: Iterable[ScoredTraceAtBudget], budget: int
) -> list[ScoredTraceAtBudget]:
    """Entries at ``budget``, best quality first; ties break by trace_id."""
    entries = [s for s in scored if s.budget == budget]
    return sorted(entries, key=lambda s: (-s.quality, s.trace_id))


def select_max_gap_pairs(
    scored: Iterable[ScoredTraceAtBudget],
    schedule: BudgetSchedule,
    query_text: str,
    query_id: str = "",
    max_pairs: int = 8,
    total_constraints: int | None = None,
) -> list[PreferencePair]:
    """The widest-gap (best, worst) pair at each checkpoint, ordered by budget.

    Budgets with fewer than two traces or with no quality spread are skipped
    with a logged notice. When more than ``max_pairs`` budgets qualify, the
    largest-gap budgets are kept.
    """
    entries = list(scored)
    pairs: list[PreferencePair] = []
    for budget in schedule.checkpoints:
        ranked = rank_at_budget(entries, budget)
        if len(ranked) < 2:
            log.info("budget %d skipped: %d trace(s) available", budget, len(ranked))
            continue
        best, worst = ranked[0], ranked[-1]
        gap = best.quality - worst.quality
        if gap == 0:
            log.info("budget %d skipped: all %d traces tied at quality %g",
                     budget, len(ranked), best.quality)
            continue
        pairs.append(PreferencePair(
            budget=budget,
            query_text=query_text,
            preferred=best,
            rejected=worst,
            gap=gap,
            query_id=query_id,
            total_constraints=total_constraints,
        ))
    if max_pairs is not None and len(pairs) > max_pairs:
        keep = sorted(pairs, key=lambda p: (-p.gap, p.budget))[:max_pairs]
        pairs = sorted(keep, key=lambda p: p.budget)
    return pairs


def select_pairs_across_queries(
    per_query: Mapping[str, tuple[str, Sequence[ScoredTraceAtBudget], int | None]],
    schedule: BudgetSchedule,
    max_pairs: int = 8,
) -> list[PreferencePair]:
    """With several seed queries, each budget takes the pair from whichever
    query shows the globally largest gap there."""
    best_at: dict[int, PreferencePair] = {}
    for query_id in sorted(per_query):
        query_text, scored, total = per_query[query_id]
        for pair in select_max_gap_pairs(
            scored, schedule, query_text,
            query_id=query_id, max_pairs=None, total_constraints=total,
        ):
            cur = best_at.get(pair.budget)
            if cur is None or pair.gap > cur.gap:
                best_at[pair.budget] = pair
    pairs = [best_at[b] for b in schedule.checkpoints if b in best_at]
    if max_pairs is not None and len(pairs) > max_pairs:
        keep = sorted(pairs, key=lambda p: (-p.gap, p.budget))[:max_pairs]
        pairs = sorted(keep, key=lambda p: p.budget)
    return pairs


def _rate_label(config: PdpPromptConfig) -> str:
    return "Satisfaction Rate" if config.metric_name.upper() == "CSR" else config.metric_name


def _quality_lines(config: PdpPromptConfig, side: str,
                   entry: ScoredTraceAtBudget, total: int | None) -> str:
    rate = f"{entry.quality * 100:.1f}%"
    line = f"Why {side}: - {_rate_label(config)}: {rate}"
    if total:
        satisfied = round(entry.quality * total)
        line += f" - Satisfied: {satisfied}/{total} constraints"
    return line


def _render(config: PdpPromptConfig, pairs: Sequence[PreferencePair],
            target_query: str, contrastive: bool) -> str:
    if not pairs:
        raise ValueError("cannot render a prompt without preference pairs")
    out: list[str] = []
    if contrastive:
        out.append(
            "Here are examples showing the difference between GOOD and POOR "
            "reasoning approaches under different progress checkpoints."
        )
    else:
        out.append(
            "Here are examples showing GOOD reasoning approaches under "
            "different progress checkpoints."
        )
    out.append("You should follow the GOOD reasoning approach to reason step by step.")
    out.append("")
    out.append("[Scoring]")
    out.append(config.scoring_blurb)
    out.append("")
    out.append("[Examples @ Token Budgets]")
    metric = config.metric_name
    for pair in pairs:
        header = "Pair" if contrastive else "Example"
        out.append(f"--- {header} (@ Token Budget {pair.budget} tokens) ---")
        out.append(f"Question: {pair.query_text}")
        good_tag = f"GOOD REASONING (HIGHER {metric})" if contrastive else "GOOD REASONING"
        out.append(f"- {good_tag} [{metric}={pair.preferred.quality:g}]: "
                   f"{pair.preferred.prefix_text}")
        out.append("  " + _quality_lines(config, "GOOD", pair.preferred,
                                         pair.total_constraints))
        if contrastive:
            out.append(f"- POOR REASONING (Lower {metric}) "
                       f"[{metric}={pair.rejected.quality:g}]: "
                       f"{pair.rejected.prefix_text}")
            out.append("  " + _quality_lines(config, "POOR", pair.rejected,
                                             pair.total_constraints))
        out.append("")
    out.append(
        "Now, please follow the GOOD reasoning traces in the examples to "
        f"reason step by step to solve the target problem: {target_query}"
    )
    return "\n".join(out)


def render_pdp_prompt(config: PdpPromptConfig, pairs: Sequence[PreferencePair],
                      target_query: str) -> str:
    """Full contrastive prompt: one GOOD/POOR pair block per budget."""
    if config.mode != "pdp":
        raise ValueError(f"config mode is {config.mode!r}, expected 'pdp'")
    return _render(config, pairs, target_query, contrastive=True)


def render_pdp_plus_prompt(config: PdpPromptConfig, pairs: Sequence[PreferencePair],
                           target_query: str) -> str:
    """Exemplars-only variant: the same blocks with the POOR sides removed."""
    if config.mode != "pdp_plus":
        raise ValueError(f"config mode is {config.mode!r}, expected 'pdp_plus'")
    return _render(config, pairs, target_query, contrastive=False)


def write_pairs_jsonl(pairs: Sequence[PreferencePair], path: str | Path) -> None:
    """Persist pairs, one JSON object per line."""
    lines = []
    for p in pairs:
        lines.append(json.dumps({
            "budget": p.budget,
            "query_id": p.query_id,
            "query_text": p.query_text,
            "preferred_trace_id": p.preferred.trace_id,
            "preferred_trace": p.preferred.prefix_text,
            "rejected_trace_id": p.rejected.trace_id,
            "rejected_trace": p.rejected.prefix_text,
            "q_pref": p.preferred.quality,
            "q_rej": p.rejected.quality,
            "gap": p.gap,
            "total_constraints": p.total_constraints,
        }, sort_keys=True, ensure_ascii=False))
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")


def read_pairs_jsonl(path: str | Path) -> list[PreferencePair]:
    pairs: list[PreferencePair] = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        row = json.loads(line)
        pairs.append(PreferencePair(
            budget=row["budget"],
            query_text=row["query_text"],
            preferred=ScoredTraceAtBudget(
                row["preferred_trace_id"], row["budget"],
                row["preferred_trace"], row["q_pref"],
            ),
            rejected=ScoredTraceAtBudget(
                row["rejected_trace_id"], row["budget"],
                row["rejected_trace"], row["q_rej"],
            ),
            gap=row["gap"],
            query_id=row.get("query_id", ""),
            total_constraints=row.get("total_constraints"),
        ))
    return pairs
