"""Quality-vs-budget curves and their summary statistics.

A run produces, for every reasoning trace, a quality score at each token
budget checkpoint. This module holds those curves and reduces them to the
three headline numbers reported per method: the final score, the mean score
across checkpoints, and the anytime index (normalized area under the
running-max curve, trapezoid rule).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np


@dataclass(frozen=True)
class BudgetSchedule:
    """Ordered token-budget checkpoints at which traces are cut."""

    checkpoints: tuple[int, ...]

    def __init__(self, checkpoints: Iterable[int]) -> None:
        pts = tuple(int(b) for b in checkpoints)
        if not pts:
            raise ValueError("schedule needs at least one checkpoint")
        if any(b < 1 for b in pts):
            raise ValueError(f"checkpoints must be >= 1, got {pts}")
        if any(b2 <= b1 for b1, b2 in zip(pts, pts[1:])):
            raise ValueError(f"checkpoints must be strictly increasing, got {pts}")
        object.__setattr__(self, "checkpoints", pts)

    def __len__(self) -> int:
        return len(self.checkpoints)

    @property
    def span(self) -> int:
        """Distance between the last and first checkpoint."""
        return self.checkpoints[-1] - self.checkpoints[0]


@dataclass(frozen=True)
class QualityCurve:
    """Per-checkpoint quality scores for one trace or one aggregated method."""

    schedule: BudgetSchedule
    scores: tuple[float, ...]

    def __init__(self, schedule: BudgetSchedule, scores: Iterable[float]) -> None:
        vals = tuple(float(s) for s in scores)
        if len(vals) != len(schedule):
            raise ValueError(
                f"{len(vals)} scores for {len(schedule)} checkpoints"
            )
        if any(not np.isfinite(s) or s < 0 for s in vals):
            raise ValueError(f"scores must be finite and >= 0, got {vals}")
        object.__setattr__(self, "schedule", schedule)
        object.__setattr__(self, "scores", vals)


@dataclass(frozen=True)
class AnytimeSummary:
    """Final / average / anytime-index triple for one curve."""

    final: float
    average: float
    anytime_index: float
    q_max: float


def running_max(curve: QualityCurve) -> QualityCurve:
    """Best score achieved at or before each checkpoint (non-decreasing)."""
    best = np.maximum.accumulate(np.asarray(curve.scores, dtype=float))
    return QualityCurve(curve.schedule, best.tolist())


def anytime_index(curve: QualityCurve, q_max: float = 1.0) -> float:
    """Normalized trapezoid area under the running-max of ``curve``.

    The score axis is normalized by ``q_max`` and the budget axis by the
    schedule span, so a curve that sits at ``q_max`` from the first
    checkpoint onward scores exactly 1.0 and any curve with scores in
    [0, q_max] lands in [0, 1].
    """
    if q_max <= 0:
        raise ValueError(f"q_max must be positive, got {q_max}")
    sched = curve.schedule
    if len(sched) < 2:
        raise ValueError(
            f"anytime index needs >= 2 checkpoints, got {len(sched)}"
        )
    budgets = np.asarray(sched.checkpoints, dtype=float)
    # Normalizing before the quadrature keeps saturation exact: q/q == 1.0.
    best = np.maximum.accumulate(np.asarray(curve.scores, dtype=float)) / q_max
    trapezoids = 0.5 * (best[:-1] + best[1:]) * np.diff(budgets)
    return float(np.sum(trapezoids) / sched.span)


def aggregate_mean(curves: Sequence[QualityCurve]) -> QualityCurve:
    """Per-checkpoint arithmetic mean across curves sharing one schedule."""
    if not curves:
        raise ValueError("no curves to aggregate")
    sched = curves[0].schedule
    for i, c in enumerate(curves):
        if c.schedule != sched:
            raise ValueError(
                f"curve {i} has schedule {c.schedule.checkpoints}, "
                f"expected {sched.checkpoints}"
            )
    table = np.asarray([c.scores for c in curves], dtype=float)
    return QualityCurve(sched, table.mean(axis=0).tolist())


def summarize(curve: QualityCurve, q_max: float = 1.0) -> AnytimeSummary:
    """Final score, mean score, and anytime index for one curve."""
    return AnytimeSummary(
        final=curve.scores[-1],
        average=float(np.mean(curve.scores)),
        anytime_index=anytime_index(curve, q_max),
        q_max=q_max,
    )
