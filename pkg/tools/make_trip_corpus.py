#!/usr/bin/env python3
"""Build the annotated trip query/plan corpus at fixtures/trip_corpus.jsonl.

Each case pairs a rendered query with a rendered plan and the expected
per-constraint outcomes. Expectations are computed here from the structured
ground truth the renderer started from (day-set arithmetic on known
segments), never by running the checker, so the corpus is an independent
oracle for the text parsers and the constraint verdicts.

Deterministic: re-running reproduces the file byte for byte.
"""

from __future__ import annotations

import json
import random
from pathlib import Path

CITY_POOL = [
    "Amsterdam", "Barcelona", "Berlin", "Bucharest", "Budapest", "Copenhagen",
    "Dublin", "Edinburgh", "Florence", "Geneva", "Hamburg", "Helsinki",
    "Krakow", "Lisbon", "London", "Lyon", "Madrid", "Milan", "Munich",
    "Naples", "Nice", "Oslo", "Paris", "Porto", "Prague", "Reykjavik",
    "Riga", "Rome", "Santorini", "Seville", "Split", "Stockholm", "Tallinn",
    "Valencia", "Venice", "Vienna", "Vilnius", "Warsaw", "Zurich",
]

STAY_TEMPLATES = [
    "You plan to stay in {c} for {d} days.",
    "You want to spend {d} days in {c}.",
    "You would like to visit {c} for {d} days.",
]
EVENT_TEMPLATES = [
    "You have to attend a workshop in {c} between day {a} and day {b}.",
    "From day {a} to day {b}, there is an annual show you want to attend in {c}.",
    "During day {a} and day {b}, you have to attend a conference in {c}.",
]

REFERENCE_QUERY = (
    "You plan to visit 6 European cities for 18 days in total. You only take "
    "direct flights to commute between cities. You plan to stay in Bucharest "
    "for 5 days. From day 6 to day 10, there is a annual show you want to "
    "attend in Bucharest. You would like to visit Prague for 2 days. You want "
    "to spend 2 days in Budapest. You plan to stay in Split for 5 days. You "
    "plan to stay in Tallinn for 4 days. You have to attend a workshop in "
    "Tallinn between day 1 and day 4. You plan to stay in Dublin for 5 days. "
    "During day 10 and day 14, you have to attend a conference in Dublin.\n"
    "Here are the cities that have direct flights:\n"
    "Prague and Budapest, Tallinn and Prague, Bucharest and Dublin, Budapest "
    "and Bucharest, Prague and Bucharest, Prague and Split, Dublin and Split, "
    "Tallinn and Dublin, Budapest and Dublin, Prague and Dublin.\n"
    "Find a trip plan of visiting the cities for 18 days by taking direct "
    "flights to commute between them."
)


def norm(city: str) -> str:
    return " ".join(city.split()).casefold()


class Structured:
    """Ground truth for one query: stays in sentence order, events, flights."""

    def __init__(self, k, total, stays, events, flights):
        self.k = k
        self.total = total
        self.stays = stays      # list[(city, days)] in sentence order
        self.events = events    # dict city -> (a, b) in sentence order
        self.flights = flights  # set of sorted normalized pairs


def expected_outcomes(qs: Structured, segs: list[tuple[int, int, str]]) -> list[dict]:
    """Independent day-set arithmetic over structured segments."""
    day_sets: dict[str, set[int]] = {}
    for s, e, c in segs:
        day_sets.setdefault(norm(c), set()).update(range(s, e + 1))

    out = [
        {"kind": "city_count", "subject": None,
         "satisfied": len(day_sets) == qs.k},
        {"kind": "total_days", "subject": None,
         "satisfied": bool(segs) and segs[-1][1] == qs.total},
    ]
    for city, d in qs.stays:
        out.append({"kind": "stay_duration", "subject": city,
                    "satisfied": len(day_sets.get(norm(city), ())) == d})
    for city, (a, b) in qs.events.items():
        out.append({"kind": "event_window", "subject": city,
                    "satisfied": set(range(a, b + 1)) <= day_sets.get(norm(city), set())})
    for (s1, e1, c1), (s2, e2, c2) in zip(segs, segs[1:]):
        if norm(c1) == norm(c2):
            continue
        out.append({"kind": "flight_adjacency", "subject": f"{c1}-{c2}",
                    "satisfied": tuple(sorted((norm(c1), norm(c2)))) in qs.flights})
    return out


def render_query(rng: random.Random, qs: Structured) -> str:
    parts = [
        f"You plan to visit {qs.k} European cities for {qs.total} days in total. "
        "You only take direct flights to commute between cities."
    ]
    for city, d in qs.stays:
        parts.append(rng.choice(STAY_TEMPLATES).format(c=city, d=d))
        if city in qs.events:
            a, b = qs.events[city]
            parts.append(rng.choice(EVENT_TEMPLATES).format(c=city, a=a, b=b))
    pair_texts = []
    display = {}
    for city, _ in qs.stays:
        display[norm(city)] = city
    for a, b in sorted(qs.flights):
        pair_texts.append(f"{display[a]} and {display[b]}")
    rng.shuffle(pair_texts)
    parts.append(
        "Here are the cities that have direct flights:\n" + ", ".join(pair_texts) + "."
    )
    parts.append(
        f"Find a trip plan of visiting the cities for {qs.total} days by taking "
        "direct flights to commute between them."
    )
    return " ".join(parts[:-2]) + "\n" + parts[-2] + "\n" + parts[-1]


def render_plain(segs) -> str:
    return " ".join(f"Day {s}-{e}: {c}." for s, e, c in segs)


def render_narrative(rng: random.Random, segs) -> str:
    verbs = ["Stay in {c}", "Visit {c}", "Spend time in {c}", "Explore {c}"]
    lines = ["Here is a trip plan that satisfies the requirements:", ""]
    for s, e, c in segs:
        lines.append(f"Day {s}-{e}: {rng.choice(verbs).format(c=c)}.")
    return "\n".join(lines)


def render_markdown(segs) -> str:
    lines = []
    for i, (s, e, c) in enumerate(segs):
        d = e - s + 1
        lines.append(f"**Day {s}-{e}:** Arriving in {c} and visit {c} for {d} days.")
        if i + 1 < len(segs):
            lines.append(f"**Day {e}:** Fly from {c} to {segs[i + 1][2]}.")
    return "\n".join(lines)


def render_disjoint(segs, with_markers: bool) -> str:
    lines = []
    for i, (s, e, c) in enumerate(segs):
        start = s if i == 0 else s + 1
        if start == e:
            lines.append(f"Day {e}: {c}.")
        else:
            lines.append(f"Day {start}-{e}: {c}.")
        if with_markers and i + 1 < len(segs):
            lines.append(f"Day {e}: Fly from {c} to {segs[i + 1][2]}.")
    return "\n".join(lines)


def disjoint_segments(segs) -> list[tuple[int, int, str]]:
    """Segments as a marker-less disjoint rendering will be read back."""
    out = []
    for i, (s, e, c) in enumerate(segs):
        out.append((s if i == 0 else s + 1, e, c))
    return out


def make_structured(rng: random.Random) -> tuple[Structured, list[tuple[int, int, str]]]:
    k = rng.randint(3, 7)
    cities = rng.sample(CITY_POOL, k)
    durations = [rng.randint(2, 6) for _ in cities]
    total = sum(durations) - (k - 1)

    segs = []
    start = 1
    for city, d in zip(cities, durations):
        end = start + d - 1
        segs.append((start, end, city))
        start = end

    flights = {tuple(sorted((norm(a[2]), norm(b[2])))) for a, b in zip(segs, segs[1:])}
    n_extra = rng.randint(0, 3)
    for _ in range(n_extra):
        a, b = rng.sample(cities, 2)
        flights.add(tuple(sorted((norm(a), norm(b)))))

    events = {}
    for idx in sorted(rng.sample(range(k), rng.randint(0, min(3, k)))):
        s, e, c = segs[idx]
        a = rng.randint(s, e)
        b = rng.randint(a, e)
        events[c] = (a, b)

    order = list(zip(cities, durations))
    rng.shuffle(order)
    return Structured(k, total, order, events, flights), segs


def main() -> None:
    rng = random.Random(20240817)
    cases: list[dict] = []

    def add(tag, query_text, qs, segs, plan_text):
        outcomes = expected_outcomes(qs, segs)
        csr = sum(o["satisfied"] for o in outcomes) / len(outcomes)
        cases.append({
            "id": f"case-{len(cases):03d}",
            "tags": tag,
            "query_text": query_text,
            "plan_text": plan_text,
            "expected_outcomes": outcomes,
            "expected_csr": csr,
        })

    # Reference six-city instance: valid, empty, and perturbed plans.
    ref = Structured(
        k=6, total=18,
        stays=[("Bucharest", 5), ("Prague", 2), ("Budapest", 2),
               ("Split", 5), ("Tallinn", 4), ("Dublin", 5)],
        events={"Bucharest": (6, 10), "Tallinn": (1, 4), "Dublin": (10, 14)},
        flights={tuple(sorted(p)) for p in [
            ("prague", "budapest"), ("tallinn", "prague"), ("bucharest", "dublin"),
            ("budapest", "bucharest"), ("prague", "bucharest"), ("prague", "split"),
            ("dublin", "split"), ("tallinn", "dublin"), ("budapest", "dublin"),
            ("prague", "dublin"),
        ]},
    )
    ref_segs = [(1, 4, "Tallinn"), (4, 5, "Prague"), (5, 6, "Budapest"),
                (6, 10, "Bucharest"), (10, 14, "Dublin"), (14, 18, "Split")]
    add("reference-valid", REFERENCE_QUERY, ref, ref_segs, render_plain(ref_segs))
    add("reference-empty", REFERENCE_QUERY, ref, [], "")
    perturbed = [(1, 4, "Tallinn"), (4, 6, "Prague"), (6, 10, "Bucharest"),
                 (10, 14, "Dublin"), (14, 18, "Split")]
    add("reference-perturbed", REFERENCE_QUERY, ref, perturbed, render_plain(perturbed))

    # Engineered ten-constraint cases: 8/10 and 2/10 satisfied.
    ten = Structured(
        k=4, total=11,
        stays=[("Lisbon", 3), ("Porto", 4), ("Madrid", 3), ("Seville", 4)],
        events={"Porto": (4, 5)},
        flights={tuple(sorted(p)) for p in [
            ("lisbon", "porto"), ("porto", "madrid"), ("madrid", "seville"),
            ("lisbon", "madrid"),
        ]},
    )
    ten_query = (
        "You plan to visit 4 European cities for 11 days in total. You only "
        "take direct flights to commute between cities. You plan to stay in "
        "Lisbon for 3 days. You plan to stay in Porto for 4 days. During day 4 "
        "and day 5, you have to attend a conference in Porto. You would like "
        "to visit Madrid for 3 days. You want to spend 4 days in Seville.\n"
        "Here are the cities that have direct flights:\n"
        "Lisbon and Porto, Porto and Madrid, Madrid and Seville, Lisbon and Madrid.\n"
        "Find a trip plan of visiting the cities for 11 days by taking direct "
        "flights to commute between them."
    )
    eight_of_ten = [(1, 2, "Lisbon"), (3, 6, "Porto"), (6, 9, "Madrid"), (8, 11, "Seville")]
    add("engineered-8of10", ten_query, ten, eight_of_ten, render_plain(eight_of_ten))
    two_of_ten = [(1, 3, "Rome"), (3, 6, "Venice"), (6, 8, "Milan"), (8, 11, "Naples")]
    add("engineered-2of10", ten_query, ten, two_of_ten, render_plain(two_of_ten))

    # Generated cases across styles and damage kinds.
    def gen(tag, n, damage=None, style="plain"):
        for _ in range(n):
            qs, segs = make_structured(rng)
            query_text = render_query(rng, qs)
            mod = [list(s) for s in segs]
            if damage == "extend":
                i = rng.randrange(len(mod))
                mod[i][1] += 1
            elif damage == "shrink":
                i = rng.randrange(len(mod))
                mod[i][1] -= 1
            elif damage == "swap":
                if len(mod) < 3:
                    continue
                i = rng.randrange(len(mod) - 2)
                j = i + 2
                mod[i][2], mod[j][2] = mod[j][2], mod[i][2]
            elif damage == "drop":
                mod.pop(rng.randrange(len(mod)))
            elif damage == "wrong_city":
                unused = [c for c in CITY_POOL if norm(c) not in
                          {norm(x) for x, _ in qs.stays}]
                mod[rng.randrange(len(mod))][2] = rng.choice(unused)
            segs_mod = [tuple(s) for s in mod]

            if style == "plain":
                plan = render_plain(segs_mod)
            elif style == "narrative":
                plan = render_narrative(rng, segs_mod)
            elif style == "markdown":
                plan = render_markdown(segs_mod)
            elif style == "disjoint":
                plan = render_disjoint(segs_mod, with_markers=True)
            elif style == "disjoint_ambiguous":
                plan = render_disjoint(segs_mod, with_markers=False)
                segs_mod = disjoint_segments(segs_mod)
            add(tag, query_text, qs, segs_mod, plan)

    gen("valid-plain", 5)
    gen("valid-narrative", 4, style="narrative")
    gen("valid-markdown", 4, style="markdown")
    gen("valid-disjoint-marked", 4, style="disjoint")
    gen("damaged-extend", 8, damage="extend")
    gen("damaged-shrink", 8, damage="shrink")
    gen("damaged-swap", 7, damage="swap")
    gen("damaged-drop", 6, damage="drop")
    gen("damaged-wrong-city", 6, damage="wrong_city")
    gen("disjoint-ambiguous", 4, style="disjoint_ambiguous")

    for i in range(3):
        qs, _ = make_structured(rng)
        add("garbage", render_query(rng, qs), qs, [],
            "I could not determine a consistent ordering of the cities within "
            "the allotted days, sorry.")
    for i in range(2):
        qs, _ = make_structured(rng)
        add("empty", render_query(rng, qs), qs, [], "")

    out = Path(__file__).resolve().parents[1] / "fixtures" / "trip_corpus.jsonl"
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(
        "".join(json.dumps(c, ensure_ascii=False, sort_keys=True) + "\n" for c in cases),
        encoding="utf-8",
    )
    print(f"wrote {len(cases)} cases to {out}")


if __name__ == "__main__":
    main()
