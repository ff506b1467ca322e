"""Building preference pairs and rendering contrastive prompts.

At each budget the widest-gap (best, worst) pair of scored trace prefixes
becomes an in-context exemplar. The full render shows GOOD and POOR
reasoning side by side; the exemplars-only variant keeps just the GOOD
sides.

Run from the repository root:  python demos/04_preference_prompts.py
"""

import random

from anytime_eval import (
    BudgetSchedule,
    PdpPromptConfig,
    ScoredTraceAtBudget,
    rank_at_budget,
    render_pdp_plus_prompt,
    render_pdp_prompt,
    select_max_gap_pairs,
)

rng = random.Random(7)
schedule = BudgetSchedule([100, 200, 300, 400])

# A pool of 6 traces scored at every checkpoint. Quality improves with the
# budget, but traces differ: some lock in the key insight early.
pool = []
for t in range(6):
    skill = rng.uniform(0.2, 0.9)
    for b in schedule.checkpoints:
        quality = round(min(1.0, skill * b / 400 + rng.uniform(0, 0.2)), 2)
        pool.append(ScoredTraceAtBudget(
            trace_id=f"trace-{t}",
            budget=b,
            prefix_text=f"(first {b} tokens of trace {t}: allocate shared "
                        f"flight days, then pin the event windows...)",
            quality=quality,
        ))

print("ranking at budget 200 (best first):")
for entry in rank_at_budget(pool, 200):
    print(f"  {entry.trace_id}  quality={entry.quality}")

pairs = select_max_gap_pairs(
    pool, schedule,
    query_text="Plan a 9-day visit across Lisbon, Madrid, and Barcelona.",
    total_constraints=8,
)
print(f"\nselected {len(pairs)} pairs (one per budget with a quality spread):")
for p in pairs:
    print(f"  @{p.budget}: {p.preferred.trace_id} ({p.preferred.quality}) over "
          f"{p.rejected.trace_id} ({p.rejected.quality}), gap {p.gap:.2f}")

target = "Plan an 11-day visit across Vienna, Prague, Budapest, and Krakow."
print("\n" + "=" * 72)
print(render_pdp_prompt(PdpPromptConfig(mode="pdp"), pairs[:1], target))
print("=" * 72)
print("\nexemplars-only variant of the same pair:\n")
print(render_pdp_plus_prompt(PdpPromptConfig(mode="pdp_plus"), pairs[:1], target))
