"""Quality-vs-budget curves and the anytime index.

Two methods can reach the same final score yet differ sharply in how fast
they get there. The anytime index (normalized area under the running-max
curve) separates the fast thinker from the slow one.

Run from the repository root:  python demos/01_anytime_curves.py
"""

import numpy as np

from anytime_eval import BudgetSchedule, QualityCurve, anytime_index, running_max, summarize

# Eight reasoning-token checkpoints, the short-task default ladder.
schedule = BudgetSchedule(range(100, 801, 100))

# A noisy single-trace curve: quality can dip when extra reasoning drifts.
noisy = QualityCurve(schedule, [0.2, 0.5, 0.45, 0.7, 0.65, 0.8, 0.8, 0.9])
print("raw scores:     ", noisy.scores)
print("running max:    ", running_max(noisy).scores)
print("anytime index:  ", round(anytime_index(noisy), 4))
print()

# Fast vs slow thinker: identical final score, very different trajectories.
fast = QualityCurve(schedule, [0.85, 0.9, 0.9, 0.92, 0.93, 0.94, 0.95, 0.95])
slow = QualityCurve(schedule, [0.10, 0.15, 0.2, 0.3, 0.4, 0.6, 0.85, 0.95])

for name, curve in (("fast", fast), ("slow", slow)):
    s = summarize(curve, q_max=1.0)
    print(f"{name:>4}: final={s.final:.2f}  average={s.average:.3f}  "
          f"anytime={s.anytime_index:.3f}")

print()
print("Same final, but the fast thinker's area under the curve is much larger:")
gap = anytime_index(fast) - anytime_index(slow)
print(f"anytime gap = {gap:.3f}")

# The index is scale-covariant: rescaling scores and the bound together
# changes nothing.
doubled = QualityCurve(schedule, np.array(fast.scores) * 2)
assert anytime_index(doubled, q_max=2.0) == anytime_index(fast, q_max=1.0)
print("scale covariance holds: index(2*curve, q_max=2) == index(curve, q_max=1)")
