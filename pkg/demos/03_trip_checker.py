"""Trip-plan constraint checking and the constraint satisfaction rate.

Parses a natural-language trip query into checkable constraints, reads
free-text itineraries into day segments, and verifies every constraint.
Flight days count toward both cities, so a fully consistent plan's stay
durations sum to the trip length plus the number of flights.

Run from the repository root:  python demos/03_trip_checker.py
"""

import json
from pathlib import Path

from anytime_eval import csr, evaluate_constraints, parse_itinerary, parse_trip_query

corpus = [json.loads(line) for line in
          Path("fixtures/trip_corpus.jsonl").read_text().splitlines()]
case = next(c for c in corpus if c["tags"] == "reference-valid")

query = parse_trip_query(case["query_text"])
print("extracted from the query:")
print(f"  cities: {query.city_count}, trip length: {query.total_days} days")
print(f"  stays:  {query.stays}")
print(f"  events: {query.events}")
print(f"  direct flights: {len(query.flights)} pairs\n")

plans = {
    "a fully consistent plan": case["plan_text"],
    "a plan that skips Budapest": (
        "Day 1-4: Tallinn. Day 4-6: Prague. Day 6-10: Bucharest. "
        "Day 10-14: Dublin. Day 14-18: Split."
    ),
    "an empty response": "",
}

for label, text in plans.items():
    plan = parse_itinerary(text)
    outcomes = evaluate_constraints(query, plan)
    rate = csr(outcomes)
    n_ok = sum(o.satisfied for o in outcomes)
    print(f"{label}: CSR = {rate:.3f}  ({n_ok}/{len(outcomes)} constraints)")
    for o in outcomes:
        if not o.satisfied:
            print(f"    ✗ {o.kind}{f'({o.subject})' if o.subject else ''}: {o.detail}")
    if plan.segments:
        total = sum(s.days for s in plan.segments)
        print(f"    stay-day sum {total} vs trip length {query.total_days} "
              f"+ {len(plan.segments) - 1} flights")
    print()
