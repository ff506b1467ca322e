"""Dataset loading and per-task quality scoring.

Instances arrive as JSONL rows of ``{id, question, gold?, options?}``.
Three task kinds are supported: trip planning (scored by constraint
satisfaction rate), integer math answers, and multiple-choice questions
(both scored by exact match).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from . import answers, trip

TRIP = "trip"
AIME = "aime"
GPQA = "gpqa"
KINDS = (TRIP, AIME, GPQA)


@dataclass(frozen=True)
class Instance:
    id: str
    question: str
    gold: str | None = None
    options: tuple[tuple[str, str], ...] | None = None


@dataclass(frozen=True)
class DatasetProfile:
    """Default budgets and sampling sizes for one task family."""

    kind: str
    checkpoints: tuple[int, ...]
    max_tokens: int
    n_traces: int
    prefgen_n_traces: int
    prefgen_seed_count: int


PROFILES: dict[str, DatasetProfile] = {
    TRIP: DatasetProfile(
        kind=TRIP,
        checkpoints=tuple(range(100, 801, 100)),
        max_tokens=4096,
        n_traces=3,
        prefgen_n_traces=64,
        prefgen_seed_count=5,
    ),
    AIME: DatasetProfile(
        kind=AIME,
        checkpoints=tuple(range(200, 1601, 100)),
        max_tokens=16384,
        n_traces=3,
        prefgen_n_traces=32,
        prefgen_seed_count=5,
    ),
    GPQA: DatasetProfile(
        kind=GPQA,
        checkpoints=tuple(range(200, 1601, 100)),
        max_tokens=16384,
        n_traces=3,
        prefgen_n_traces=32,
        prefgen_seed_count=30,
    ),
}


def _parse_options(raw) -> tuple[tuple[str, str], ...]:
    if isinstance(raw, dict):
        return tuple(sorted((str(k), str(v)) for k, v in raw.items()))
    return tuple((str(letter), str(text)) for letter, text in raw)


def load_instances(path: str | Path, kind: str, limit: int | None = None) -> list[Instance]:
    """Read and validate instances for ``kind`` from a JSONL file."""
    if kind not in KINDS:
        raise ValueError(f"unknown dataset kind {kind!r}; expected one of {KINDS}")
    instances: list[Instance] = []
    for line_no, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        row = json.loads(line)
        question = row.get("question") or row.get("query")
        if not question:
            raise ValueError(f"{path}:{line_no}: instance has no question/query field")
        instance = Instance(
            id=str(row.get("id", f"row{line_no}")),
            question=question,
            gold=str(row["gold"]) if "gold" in row else None,
            options=_parse_options(row["options"]) if row.get("options") else None,
        )
        if kind in (AIME, GPQA):
            if instance.gold is None:
                raise ValueError(f"{path}:{line_no}: {kind} instance needs a gold answer")
            # Raises on malformed gold/options.
            answers.AnswerSpec(kind, instance.gold, instance.options)
        instances.append(instance)
        if limit is not None and len(instances) >= limit:
            break
    if not instances:
        raise ValueError(f"no instances loaded from {path}")
    return instances


class QualityScorer:
    """Scores free-text answers for one instance of one task kind."""

    def __init__(self, kind: str, instance: Instance) -> None:
        self.kind = kind
        self.instance = instance
        if kind == TRIP:
            self._query = trip.parse_trip_query(instance.question)
            self._spec: Optional[answers.AnswerSpec] = None
        else:
            self._query = None
            self._spec = answers.AnswerSpec(kind, instance.gold, instance.options)

    @property
    def trip_query(self) -> Optional[trip.TripQuery]:
        return self._query

    @property
    def total_constraints(self) -> int | None:
        """Constraint count a fully consistent plan would face, or None.

        A complete plan visiting ``city_count`` cities has city_count - 1
        flight legs, so the denominator is known before any plan exists.
        """
        if self._query is None:
            return None
        q = self._query
        return 2 + len(q.stays) + len(q.events) + max(q.city_count - 1, 0)

    def score(self, answer_text: str) -> float:
        if self._query is not None:
            return trip.score_plan_text(self._query, answer_text)
        pred = answers.extract_final_answer(answer_text, self.kind,
                                            options=self.instance.options)
        return float(answers.score_answer(pred, self._spec))
