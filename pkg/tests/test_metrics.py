import math
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from anytime_eval.metrics import (
    BudgetSchedule,
    QualityCurve,
    aggregate_mean,
    anytime_index,
    running_max,
    summarize,
)


def oracle_running_max(scores):
    """O(T^2) double loop: max over every prefix."""
    return [max(scores[: t + 1]) for t in range(len(scores))]


def oracle_index(budgets, scores, q_max):
    """Direct trapezoid summation over the prefix-max curve."""
    best = oracle_running_max(scores)
    area = 0.0
    for t in range(len(budgets) - 1):
        area += (best[t] + best[t + 1]) / 2 * (budgets[t + 1] - budgets[t])
    return area / ((budgets[-1] - budgets[0]) * q_max)


def random_curve(rng, max_points=16):
    n = rng.randint(2, max_points)
    budgets = sorted(rng.sample(range(1, 5000), n))
    scores = [rng.random() for _ in range(n)]
    return QualityCurve(BudgetSchedule(budgets), scores)


class TestBudgetSchedule:
    def test_rejects_unsorted(self):
        with pytest.raises(ValueError, match="strictly increasing"):
            BudgetSchedule([100, 100, 200])

    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError, match=">= 1"):
            BudgetSchedule([0, 100])

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            BudgetSchedule([])

    def test_span(self):
        assert BudgetSchedule([100, 800]).span == 700


class TestRunningMax:
    def test_prefix_max(self):
        curve = QualityCurve(BudgetSchedule([100, 200, 300, 400]), [0.2, 0.5, 0.4, 0.9])
        assert running_max(curve).scores == (0.2, 0.5, 0.5, 0.9)

    def test_constant_is_fixed_point(self):
        curve = QualityCurve(BudgetSchedule([10, 20, 30]), [0.7, 0.7, 0.7])
        assert running_max(curve).scores == (0.7, 0.7, 0.7)

    def test_matches_double_loop_oracle(self):
        rng = random.Random(11)
        for _ in range(50):
            curve = random_curve(rng, max_points=10)
            got = running_max(curve).scores
            assert list(got) == oracle_running_max(list(curve.scores))


class TestAnytimeIndex:
    def test_constant_half(self):
        curve = QualityCurve(BudgetSchedule([100, 250, 400, 800]), [0.5] * 4)
        assert anytime_index(curve, 1.0) == 0.5

    def test_single_trapezoid(self):
        curve = QualityCurve(BudgetSchedule([100, 200]), [0.0, 1.0])
        assert anytime_index(curve, 1.0) == 0.5

    def test_hand_trapezoid_sum(self):
        # (0.35 + 0.5 + 0.7) * 100 / 300 with the prefix-max curve: 155/300.
        curve = QualityCurve(BudgetSchedule([100, 200, 300, 400]), [0.2, 0.5, 0.4, 0.9])
        expected = 155 / 300
        assert math.isclose(anytime_index(curve, 1.0), expected, rel_tol=1e-15)
        assert math.isclose(
            anytime_index(curve, 1.0),
            oracle_index([100, 200, 300, 400], [0.2, 0.5, 0.4, 0.9], 1.0),
            rel_tol=1e-15,
        )

    def test_degenerate_schedule_errors(self):
        curve = QualityCurve(BudgetSchedule([100]), [0.5])
        with pytest.raises(ValueError, match=">= 2 checkpoints"):
            anytime_index(curve, 1.0)

    def test_nonpositive_q_max_errors(self):
        curve = QualityCurve(BudgetSchedule([100, 200]), [0.5, 0.5])
        with pytest.raises(ValueError, match="q_max"):
            anytime_index(curve, 0.0)

    def test_matches_oracle_on_random_curves(self):
        rng = random.Random(23)
        for _ in range(200):
            curve = random_curve(rng)
            got = anytime_index(curve, 1.0)
            want = oracle_index(list(curve.schedule.checkpoints), list(curve.scores), 1.0)
            assert math.isclose(got, want, rel_tol=1e-12)


class TestProperties:
    @given(st.data())
    @settings(max_examples=150, deadline=None)
    def test_running_max_monotone_and_dominates(self, data):
        n = data.draw(st.integers(2, 12))
        budgets = sorted(data.draw(
            st.sets(st.integers(1, 10_000), min_size=n, max_size=n)))
        scores = data.draw(st.lists(
            st.floats(0, 1, allow_nan=False), min_size=n, max_size=n))
        curve = QualityCurve(BudgetSchedule(budgets), scores)
        best = running_max(curve).scores
        assert all(b2 >= b1 for b1, b2 in zip(best, best[1:]))
        assert all(b >= s for b, s in zip(best, curve.scores))

    @given(st.data())
    @settings(max_examples=150, deadline=None)
    def test_index_bounded(self, data):
        n = data.draw(st.integers(2, 12))
        budgets = sorted(data.draw(
            st.sets(st.integers(1, 10_000), min_size=n, max_size=n)))
        q_max = data.draw(st.floats(0.1, 4, allow_nan=False))
        scores = data.draw(st.lists(
            st.floats(0, 1, allow_nan=False), min_size=n, max_size=n))
        curve = QualityCurve(BudgetSchedule(budgets), [s * q_max for s in scores])
        assert 0.0 <= anytime_index(curve, q_max) <= 1.0

    def test_saturation_exact(self):
        rng = random.Random(5)
        for _ in range(100):
            n = rng.randint(2, 12)
            budgets = sorted(rng.sample(range(1, 10_000), n))
            q_max = rng.uniform(0.1, 3)
            scores = [q_max] + [rng.uniform(0, q_max) for _ in range(n - 1)]
            curve = QualityCurve(BudgetSchedule(budgets), scores)
            assert anytime_index(curve, q_max) == 1.0

    def test_scale_covariance_exact_for_binary_scales(self):
        rng = random.Random(17)
        for _ in range(100):
            curve = random_curve(rng)
            base = anytime_index(curve, 1.0)
            for c in (0.5, 2.0, 4.0, 0.25):
                scaled = QualityCurve(curve.schedule, [s * c for s in curve.scores])
                assert anytime_index(scaled, c) == base

    def test_scale_covariance_close_for_general_scales(self):
        rng = random.Random(19)
        for _ in range(100):
            curve = random_curve(rng)
            base = anytime_index(curve, 1.0)
            c = rng.uniform(0.01, 7.0)
            scaled = QualityCurve(curve.schedule, [s * c for s in curve.scores])
            assert math.isclose(anytime_index(scaled, c), base, rel_tol=1e-12)

    def test_dominance(self):
        rng = random.Random(29)
        for _ in range(100):
            n = rng.randint(2, 12)
            budgets = sorted(rng.sample(range(1, 10_000), n))
            low = [rng.random() for _ in range(n)]
            high = [min(1.0, s + rng.random() * (1 - s)) for s in low]
            sched = BudgetSchedule(budgets)
            assert (anytime_index(QualityCurve(sched, high), 1.0)
                    >= anytime_index(QualityCurve(sched, low), 1.0))


class TestAggregateMean:
    def test_singleton(self):
        curve = QualityCurve(BudgetSchedule([1, 2]), [0.3, 0.4])
        assert aggregate_mean([curve]).scores == curve.scores

    def test_symmetry(self):
        sched = BudgetSchedule([1, 2, 3])
        zeros = QualityCurve(sched, [0, 0, 0])
        ones = QualityCurve(sched, [1, 1, 1])
        assert aggregate_mean([zeros, ones]).scores == (0.5, 0.5, 0.5)

    def test_matches_per_column_oracle(self):
        rng = random.Random(13)
        sched = BudgetSchedule(sorted(rng.sample(range(1, 1000), 6)))
        curves = [QualityCurve(sched, [rng.random() for _ in range(6)])
                  for _ in range(5)]
        got = aggregate_mean(curves).scores
        for col in range(6):
            want = sum(c.scores[col] for c in curves) / 5
            assert math.isclose(got[col], want, rel_tol=1e-12)

    def test_mismatched_schedule_names_offender(self):
        a = QualityCurve(BudgetSchedule([1, 2]), [0, 0])
        b = QualityCurve(BudgetSchedule([1, 3]), [0, 0])
        with pytest.raises(ValueError, match="curve 1"):
            aggregate_mean([a, b])

    def test_empty_errors(self):
        with pytest.raises(ValueError):
            aggregate_mean([])


class TestSummarize:
    def test_read_off_fields(self):
        curve = QualityCurve(BudgetSchedule([100, 200, 300, 400]), [0.2, 0.5, 0.4, 0.9])
        s = summarize(curve, 1.0)
        assert s.final == 0.9
        assert math.isclose(s.average, 0.5, rel_tol=1e-15)

    def test_constant_curve(self):
        curve = QualityCurve(BudgetSchedule([10, 20, 40]), [0.7] * 3)
        s = summarize(curve, 1.0)
        assert s.final == 0.7
        assert math.isclose(s.average, 0.7, rel_tol=1e-15)
        assert math.isclose(s.anytime_index, 0.7, rel_tol=1e-15)

    def test_fields_match_independent_oracles(self):
        rng = random.Random(31)
        for _ in range(25):
            curve = random_curve(rng)
            s = summarize(curve, 1.0)
            assert s.final == curve.scores[-1]
            assert math.isclose(s.average, float(np.mean(curve.scores)), rel_tol=1e-12)
            assert math.isclose(
                s.anytime_index,
                oracle_index(list(curve.schedule.checkpoints), list(curve.scores), 1.0),
                rel_tol=1e-12,
            )
