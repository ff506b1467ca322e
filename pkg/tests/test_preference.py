import random
from pathlib import Path

import pytest

from anytime_eval.metrics import BudgetSchedule
from anytime_eval.preference import (
    PdpPromptConfig,
    PreferencePair,
    ScoredTraceAtBudget,
    rank_at_budget,
    read_pairs_jsonl,
    render_pdp_plus_prompt,
    render_pdp_prompt,
    select_max_gap_pairs,
    select_pairs_across_queries,
    write_pairs_jsonl,
)

GOLDEN = Path(__file__).parent / "data" / "golden"


def scored(trace_id, budget, quality, text=None):
    return ScoredTraceAtBudget(trace_id, budget, text or f"trace {trace_id}@{budget}", quality)


def golden_pairs():
    pairs = [
        PreferencePair(
            budget=100,
            query_text="Plan a 7-day visit across Alpha, Beta, and Gamma using direct flights only.",
            preferred=ScoredTraceAtBudget(
                "seed-a#1", 100,
                "Allocate the shared flight days first, then pin the event "
                "window before ordering the middle cities.", 0.8),
            rejected=ScoredTraceAtBudget(
                "seed-a#4", 100,
                "Count each city separately; the totals exceed the trip "
                "length so the plan cannot exist.", 0.2),
            gap=0.6000000000000001,
            query_id="seed-a",
            total_constraints=10,
        ),
        PreferencePair(
            budget=200,
            query_text="Plan a 7-day visit across Alpha, Beta, and Gamma using direct flights only.",
            preferred=ScoredTraceAtBudget(
                "seed-a#2", 200,
                "Order the cities so every consecutive pair has a direct "
                "flight, sharing each travel day.", 1.0),
            rejected=ScoredTraceAtBudget(
                "seed-a#0", 200,
                "Try every ordering without tracking the flight days; give "
                "up on the event window.", 0.5),
            gap=0.5,
            query_id="seed-a",
            total_constraints=10,
        ),
    ]
    target = "Plan a 12-day visit across Delta, Epsilon, Zeta, and Eta using direct flights only."
    return pairs, target


class TestRankAtBudget:
    def test_descending(self):
        entries = [scored("a", 100, 0.2), scored("b", 100, 0.9), scored("c", 100, 0.5)]
        ranked = rank_at_budget(entries, 100)
        assert [e.quality for e in ranked] == [0.9, 0.5, 0.2]

    def test_ties_break_by_trace_id(self):
        entries = [scored("c", 100, 0.5), scored("a", 100, 0.5), scored("b", 100, 0.5)]
        assert [e.trace_id for e in rank_at_budget(entries, 100)] == ["a", "b", "c"]

    def test_matches_selection_sort_oracle(self):
        rng = random.Random(61)
        entries = [scored(f"t{i:02d}", 100, rng.random()) for i in range(64)]
        ranked = rank_at_budget(entries, 100)
        pool = list(entries)
        oracle = []
        while pool:  # repeatedly pull the best remaining entry
            best = pool[0]
            for e in pool[1:]:
                if (e.quality, ) > (best.quality, ) or (
                        e.quality == best.quality and e.trace_id < best.trace_id):
                    best = e
            oracle.append(best)
            pool.remove(best)
        assert ranked == oracle


class TestSelectMaxGapPairs:
    def test_full_gap_pair(self):
        entries = [scored("good", 100, 1.0), scored("bad", 100, 0.0)]
        pairs = select_max_gap_pairs(entries, BudgetSchedule([100, 200]), "q")
        assert len(pairs) == 1
        assert pairs[0].gap == 1.0
        assert pairs[0].preferred.quality == 1.0
        assert pairs[0].rejected.quality == 0.0

    def test_zero_gap_budget_skipped(self, caplog):
        entries = [scored("a", 100, 0.5), scored("b", 100, 0.5)]
        with caplog.at_level("INFO"):
            pairs = select_max_gap_pairs(entries, BudgetSchedule([100, 200]), "q")
        assert pairs == []
        assert any("tied" in r.message for r in caplog.records)

    def test_single_trace_budget_skipped(self, caplog):
        entries = [scored("a", 100, 0.5)]
        with caplog.at_level("INFO"):
            pairs = select_max_gap_pairs(entries, BudgetSchedule([100, 200]), "q")
        assert pairs == []
        assert any("trace(s) available" in r.message for r in caplog.records)

    def test_matches_exhaustive_oracle(self):
        rng = random.Random(67)
        budgets = list(range(100, 900, 100))
        entries = [
            scored(f"t{i:02d}", b, round(rng.random(), 6))
            for i in range(64) for b in budgets
        ]
        pairs = select_max_gap_pairs(entries, BudgetSchedule(budgets), "q", max_pairs=None)
        by_budget = {p.budget: p for p in pairs}
        for b in budgets:
            col = [e for e in entries if e.budget == b]
            best_gap = max(x.quality for x in col) - min(x.quality for x in col)
            if best_gap == 0:
                assert b not in by_budget
                continue
            pair = by_budget[b]
            assert pair.preferred.quality == max(x.quality for x in col)
            assert pair.rejected.quality == min(x.quality for x in col)
            assert pair.gap == pytest.approx(best_gap, abs=1e-12)
        assert [p.budget for p in pairs] == sorted(p.budget for p in pairs)

    def test_permutation_invariant(self):
        rng = random.Random(71)
        budgets = [100, 200, 300]
        entries = [scored(f"t{i}", b, rng.random()) for i in range(16) for b in budgets]
        baseline = select_max_gap_pairs(entries, BudgetSchedule(budgets), "q")
        for _ in range(5):
            shuffled = list(entries)
            rng.shuffle(shuffled)
            assert select_max_gap_pairs(shuffled, BudgetSchedule(budgets), "q") == baseline

    def test_max_pairs_keeps_largest_gaps(self):
        budgets = list(range(100, 1600, 100))
        entries = []
        for i, b in enumerate(budgets):
            gap = (i + 1) / len(budgets)
            entries += [scored("hi", b, 0.5 + gap / 2), scored("lo", b, 0.5 - gap / 2)]
        pairs = select_max_gap_pairs(entries, BudgetSchedule(budgets), "q", max_pairs=8)
        assert len(pairs) == 8
        # The eight largest gaps live at the eight largest budgets here.
        assert [p.budget for p in pairs] == budgets[-8:]

    def test_across_queries_takes_globally_largest_gap(self):
        sched = BudgetSchedule([100, 200])
        per_query = {
            "q1": ("text-1", [scored("a", 100, 0.9), scored("b", 100, 0.3)], 10),
            "q2": ("text-2", [scored("a", 100, 1.0), scored("b", 100, 0.0)], 12),
        }
        pairs = select_pairs_across_queries(per_query, sched)
        assert len(pairs) == 1
        assert pairs[0].query_id == "q2"
        assert pairs[0].total_constraints == 12


class TestPreferencePairValidation:
    def test_preferred_must_beat_rejected(self):
        with pytest.raises(ValueError, match="must exceed"):
            PreferencePair(100, "q", scored("a", 100, 0.2), scored("b", 100, 0.8), gap=0.6)

    def test_budgets_must_match(self):
        with pytest.raises(ValueError, match="share the pair's budget"):
            PreferencePair(100, "q", scored("a", 200, 0.8), scored("b", 100, 0.2), gap=0.6)

    def test_gap_must_equal_difference(self):
        with pytest.raises(ValueError, match="quality difference"):
            PreferencePair(100, "q", scored("a", 100, 0.8), scored("b", 100, 0.2), gap=0.5)


class TestRenders:
    def test_contrastive_block_contents(self):
        pairs, target = golden_pairs()
        text = render_pdp_prompt(PdpPromptConfig(mode="pdp"), pairs[:1], target)
        assert "Satisfaction Rate: 80.0%" in text
        assert "Satisfied: 8/10 constraints" in text
        assert "Satisfaction Rate: 20.0%" in text
        assert "Satisfied: 2/10 constraints" in text
        assert "--- Pair (@ Token Budget 100 tokens) ---" in text
        assert "GOOD REASONING (HIGHER CSR)" in text
        assert "POOR REASONING (Lower CSR)" in text
        assert text.rstrip().endswith(target)

    def test_zero_pairs_is_an_error(self):
        with pytest.raises(ValueError, match="without preference pairs"):
            render_pdp_prompt(PdpPromptConfig(mode="pdp"), [], "target")

    def test_mode_mismatch_is_an_error(self):
        pairs, target = golden_pairs()
        with pytest.raises(ValueError, match="expected 'pdp'"):
            render_pdp_prompt(PdpPromptConfig(mode="pdp_plus"), pairs, target)
        with pytest.raises(ValueError, match="expected 'pdp_plus'"):
            render_pdp_plus_prompt(PdpPromptConfig(mode="pdp"), pairs, target)

    def test_exemplar_only_render_has_no_poor_block(self):
        pairs, target = golden_pairs()
        text = render_pdp_plus_prompt(PdpPromptConfig(mode="pdp_plus"), pairs, target)
        assert "POOR" not in text
        assert "GOOD REASONING" in text

    def test_renders_differ_only_by_poor_blocks_and_headers(self):
        pairs, target = golden_pairs()
        pdp = render_pdp_prompt(PdpPromptConfig(mode="pdp"), pairs, target)
        plus = render_pdp_plus_prompt(PdpPromptConfig(mode="pdp_plus"), pairs, target)
        for pair in pairs:
            assert pair.preferred.prefix_text in pdp
            assert pair.preferred.prefix_text in plus
            assert pair.rejected.prefix_text in pdp
            assert pair.rejected.prefix_text not in plus

    def test_intermediate_solutions_never_leak(self):
        pairs, target = golden_pairs()
        solutions = ["Day 1-3: Alpha. Day 3-5: Beta. Day 5-7: Gamma.",
                     "Answer: 42"]
        for render in (
            render_pdp_prompt(PdpPromptConfig(mode="pdp"), pairs, target),
            render_pdp_plus_prompt(PdpPromptConfig(mode="pdp_plus"), pairs, target),
        ):
            for solution in solutions:
                assert solution not in render

    def test_accuracy_metric_blurb(self):
        pairs, target = golden_pairs()
        pair = PreferencePair(
            budget=100, query_text="Some math question",
            preferred=scored("a", 100, 1.0), rejected=scored("b", 100, 0.0),
            gap=1.0,
        )
        cfg = PdpPromptConfig(
            mode="pdp", metric_name="Accuracy",
            scoring_blurb="Accuracy = 1 if the final answer matches the reference solution, else 0.",
        )
        text = render_pdp_prompt(cfg, [pair], target)
        assert "[Accuracy=1]" in text
        assert "Accuracy: 100.0%" in text
        assert "constraints" not in text.split("[Examples", 1)[1]

    def test_golden_snapshot_pdp(self):
        pairs, target = golden_pairs()
        want = (GOLDEN / "pdp_prompt.txt").read_text(encoding="utf-8")
        assert render_pdp_prompt(PdpPromptConfig(mode="pdp"), pairs, target) == want

    def test_golden_snapshot_pdp_plus(self):
        pairs, target = golden_pairs()
        want = (GOLDEN / "pdp_plus_prompt.txt").read_text(encoding="utf-8")
        assert render_pdp_plus_prompt(
            PdpPromptConfig(mode="pdp_plus"), pairs, target) == want

    def test_config_validation(self):
        with pytest.raises(ValueError, match="unknown prompt mode"):
            PdpPromptConfig(mode="dpo")
        with pytest.raises(ValueError, match="never included"):
            PdpPromptConfig(mode="pdp", omit_intermediate_solutions=False)


class TestPairsJsonl:
    def test_round_trip(self, tmp_path):
        pairs, _ = golden_pairs()
        path = tmp_path / "pairs.jsonl"
        write_pairs_jsonl(pairs, path)
        assert read_pairs_jsonl(path) == pairs

    def test_deterministic_serialization(self, tmp_path):
        pairs, _ = golden_pairs()
        a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
        write_pairs_jsonl(pairs, a)
        write_pairs_jsonl(pairs, b)
        assert a.read_bytes() == b.read_bytes()
