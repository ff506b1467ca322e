"""Trip-planning constraint extraction, itinerary parsing, and CSR.

Queries are natural-language trip requests ("visit 6 European cities for
18 days in total ... direct flights: A and B, ..."); plans are free-text
itineraries ("Day 1-4: Tallinn. Day 4: Fly to Prague. ..."). The checker
extracts five constraint families from the query, reads the plan into day
segments, verifies each constraint, and reports the fraction satisfied.

Day accounting uses the shared-flight-day convention: the day of a flight
counts toward both the departure and the arrival city, so in a fully
consistent plan consecutive segments share their boundary day and per-city
durations sum to the trip length plus the number of flights.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

CONSTRAINT_FAMILIES = (
    "city_count",
    "total_days",
    "stay_duration",
    "event_window",
    "flight_adjacency",
)

_CITY = r"[A-Z][A-Za-z'\-]*(?:\s+[A-Z][A-Za-z'\-]*)*"

_CITY_COUNT = re.compile(r"visit\s+(\d+)\s+(?:[A-Za-z\-]+\s+)*?cities", re.IGNORECASE)
_TOTAL_DAYS = re.compile(r"(\d+)\s+days?\s+in\s+total", re.IGNORECASE)
_TOTAL_DAYS_ALT = re.compile(r"trip\s+plan[^.]*?for\s+(\d+)\s+days", re.IGNORECASE)

_STAY_PATTERNS = [
    re.compile(rf"(?i:stay(?:ing)?\s+in)\s+({_CITY})\s+(?i:for)\s+(\d+)\s+(?i:days?)"),
    re.compile(rf"(?i:spend)\s+(\d+)\s+(?i:days?\s+in)\s+({_CITY})"),
    re.compile(rf"(?i:visit(?:ing)?)\s+({_CITY})\s+(?i:for)\s+(\d+)\s+(?i:days?)"),
]
_STAY_CITY_FIRST = (True, False, True)  # group order per pattern above

_EVENT_WINDOWS = [
    re.compile(r"between\s+day\s+(\d+)\s+and\s+day\s+(\d+)", re.IGNORECASE),
    re.compile(r"from\s+day\s+(\d+)\s+to\s+day\s+(\d+)", re.IGNORECASE),
    re.compile(r"during\s+day\s+(\d+)\s+and\s+day\s+(\d+)", re.IGNORECASE),
]
_IN_CITY = re.compile(rf"\b(?i:in)\s+({_CITY})")

_FLIGHTS_MARKER = re.compile(r"direct\s+flights\s*:", re.IGNORECASE)
_FLIGHT_PAIR = re.compile(rf"({_CITY})\s+and\s+({_CITY})")

_SENTENCE_SPLIT = re.compile(r"[.!?\n]")

# Itinerary surface forms: "Day 3-5:", "**Day 3:**", "Day 3 to Day 5 -" ...
_DAY_ANCHOR = re.compile(
    r"\*{0,2}\s*Day\s+(\d+)\s*(?:(?:[-–—]|to)\s*(?:Day\s+)?(\d+))?[\s:.\*]*",
    re.IGNORECASE,
)
_FLY_KEYWORD = re.compile(
    r"\b(?:fly(?:ing)?|flight|travel(?:l?ing)?|transfer(?:ring)?|drive|driving|depart(?:ing)?)\b",
    re.IGNORECASE,
)
_FLY_TO = re.compile(rf"\b(?i:to|into)\s+({_CITY})")
_FLY_FROM = re.compile(rf"\b(?i:from)\s+({_CITY})")
_CITY_AFTER_PREP = re.compile(rf"\b(?i:in|at)\s+({_CITY})")
_CITY_AFTER_VERB = re.compile(
    rf"\b(?i:visit(?:ing)?|explore|exploring|tour(?:ing)?|reach(?:ing)?|enjoy(?:ing)?)\s+({_CITY})"
)
_CITY_ANY = re.compile(_CITY)

# Capitalized sentence-starters that are not city names.
_CITY_STOPWORDS = {
    "day", "days", "fly", "flying", "flight", "travel", "arrive", "arriving",
    "arrival", "depart", "departure", "visit", "visiting", "stay", "staying",
    "spend", "spending", "explore", "exploring", "relax", "enjoy", "attend",
    "attending", "take", "return", "continue", "then", "the", "this", "we",
    "you", "i", "on", "in", "at", "to", "from", "final", "last", "first",
    "here", "trip", "plan", "city", "cities", "rest", "morning", "afternoon",
    "evening", "sightseeing", "workshop", "conference", "wedding", "show",
}


class TripQueryParseError(ValueError):
    """Raised when a query lacks the mandatory surface patterns."""


def _norm(city: str) -> str:
    return " ".join(city.split()).casefold()


@dataclass(frozen=True)
class TripQuery:
    """Checkable structure extracted from a trip-planning query."""

    city_count: int
    total_days: int
    stays: dict[str, int]  # display city name -> required days
    events: dict[str, tuple[int, int]]  # display city name -> inclusive window
    flights: frozenset[tuple[str, str]]  # normalized, sorted pairs
    raw_text: str
    notes: tuple[str, ...] = ()

    @property
    def well_formed(self) -> bool:
        return len(self.stays) == self.city_count and not self.notes


@dataclass(frozen=True)
class Segment:
    start: int
    end: int
    city: str

    @property
    def days(self) -> int:
        return self.end - self.start + 1


@dataclass(frozen=True)
class Itinerary:
    """Ordered day segments read from a free-text plan."""

    segments: tuple[Segment, ...]
    notes: tuple[str, ...] = ()
    flight_markers: tuple[tuple[int, str | None, str], ...] = ()  # (day, from, to)

    @property
    def is_empty(self) -> bool:
        return not self.segments

    @property
    def cities(self) -> tuple[str, ...]:
        seen: dict[str, str] = {}
        for seg in self.segments:
            seen.setdefault(_norm(seg.city), seg.city)
        return tuple(seen.values())


@dataclass(frozen=True)
class ConstraintOutcome:
    """Verdict for one extracted constraint."""

    kind: str
    subject: str | None
    satisfied: bool
    detail: str

    def key(self) -> tuple[str, str | None]:
        return (self.kind, self.subject)

    def as_dict(self) -> dict:
        return {
            "kind": self.kind,
            "subject": self.subject,
            "satisfied": self.satisfied,
            "detail": self.detail,
        }


def parse_trip_query(text: str) -> TripQuery:
    """Extract the checkable constraints from a trip query's surface text."""
    if not text.strip():
        raise TripQueryParseError("empty query text")

    matched: list[str] = []
    notes: list[str] = []

    m = _CITY_COUNT.search(text)
    city_count = int(m.group(1)) if m else None
    if m:
        matched.append("city_count")

    m = _TOTAL_DAYS.search(text) or _TOTAL_DAYS_ALT.search(text)
    total_days = int(m.group(1)) if m else None
    if m:
        matched.append("total_days")

    flights_marker = _FLIGHTS_MARKER.search(text)
    body = text[: flights_marker.start()] if flights_marker else text

    stays: dict[str, int] = {}
    events: dict[str, tuple[int, int]] = {}
    for sentence in _SENTENCE_SPLIT.split(body):
        for pat, city_first in zip(_STAY_PATTERNS, _STAY_CITY_FIRST):
            sm = pat.search(sentence)
            if not sm:
                continue
            city = sm.group(1) if city_first else sm.group(2)
            days = int(sm.group(2) if city_first else sm.group(1))
            known = {_norm(c): c for c in stays}
            display = known.get(_norm(city), city)
            if display in stays and stays[display] != days:
                notes.append(f"conflicting stay durations for {display}")
            stays.setdefault(display, days)
            break

        for pat in _EVENT_WINDOWS:
            em = pat.search(sentence)
            if not em:
                continue
            start, end = int(em.group(1)), int(em.group(2))
            city = _event_city(sentence, stays)
            if city is None:
                notes.append(f"event window ({start},{end}) without a resolvable city")
            elif total_days is not None and not (1 <= start <= end <= total_days):
                notes.append(f"event window ({start},{end}) outside day range")
            elif city in events:
                notes.append(f"duplicate event window for {city}")
            else:
                events[city] = (start, end)
            break

    flights: set[tuple[str, str]] = set()
    if flights_marker:
        matched.append("flights")
        for fm in _FLIGHT_PAIR.finditer(text[flights_marker.end():]):
            a, b = _norm(fm.group(1)), _norm(fm.group(2))
            if a != b:
                flights.add(tuple(sorted((a, b))))
    if stays:
        matched.append("stays")
    if events:
        matched.append("events")

    if city_count is None or total_days is None:
        raise TripQueryParseError(
            "query missing city-count or total-days pattern; "
            f"matched families: {matched or ['none']}"
        )

    stay_norms = {_norm(c) for c in stays}
    for city in events:
        if _norm(city) not in stay_norms:
            notes.append(f"event city {city} has no stay requirement")

    return TripQuery(
        city_count=city_count,
        total_days=total_days,
        stays=stays,
        events=events,
        flights=frozenset(flights),
        raw_text=text,
        notes=tuple(notes),
    )


def _event_city(sentence: str, stays: dict[str, int]) -> str | None:
    """City an event sentence refers to: the last "in <City>" mention wins,
    preferring cities already known from stay sentences."""
    candidates = [m.group(1) for m in _IN_CITY.finditer(sentence)]
    known = {_norm(c): c for c in stays}
    for cand in reversed(candidates):
        if _norm(cand) in known:
            return known[_norm(cand)]
    if candidates:
        return candidates[-1]
    for norm_name, display in known.items():
        if re.search(rf"\b{re.escape(display)}\b", sentence):
            return display
    return None


def _extract_city(chunk: str) -> str | None:
    cleaned = re.sub(r"[*_`#]", " ", chunk)
    for pat in (_CITY_AFTER_PREP, _CITY_AFTER_VERB):
        m = pat.search(cleaned)
        if m:
            city = _strip_stopwords(m.group(1))
            if city:
                return city
    for m in _CITY_ANY.finditer(cleaned):
        city = _strip_stopwords(m.group())
        if city:
            return city
    return None


def _strip_stopwords(phrase: str) -> str | None:
    """Drop leading/trailing stopwords from a capitalized phrase."""
    words = phrase.split()
    while words and words[0].casefold() in _CITY_STOPWORDS:
        words = words[1:]
    while words and words[-1].casefold() in _CITY_STOPWORDS:
        words = words[:-1]
    return " ".join(words) if words else None


def parse_itinerary(text: str) -> Itinerary:
    """Read "Day a-b: City" stay lines and "Day a: fly ... to City" markers.

    Unrecognizable text yields an empty itinerary (scored, never raised).
    Plans written with disjoint day ranges are converted to the shared
    flight-day convention when an explicit flight line pins the travel day;
    otherwise the ambiguity is recorded in ``notes``.
    """
    notes: list[str] = []
    stays: list[Segment] = []
    markers: list[tuple[int, str | None, str]] = []

    anchors = list(_DAY_ANCHOR.finditer(text))
    for i, anchor in enumerate(anchors):
        chunk_end = anchors[i + 1].start() if i + 1 < len(anchors) else len(text)
        chunk = text[anchor.end(): chunk_end]
        start = int(anchor.group(1))
        end = int(anchor.group(2)) if anchor.group(2) else None

        if end is not None and end < start:
            notes.append(f"ignored inverted day range {start}-{end}")
            continue

        if end is None and _FLY_KEYWORD.search(chunk):
            to_m = _FLY_TO.search(chunk)
            from_m = _FLY_FROM.search(chunk)
            if to_m:
                markers.append((start, from_m.group(1) if from_m else None, to_m.group(1)))
            else:
                notes.append(f"flight line on day {start} without destination")
            continue

        city = _extract_city(chunk)
        if city is None:
            notes.append(f"no city found for day {start} entry")
            continue
        stays.append(Segment(start=start, end=end if end is not None else start, city=city))

    stays.sort(key=lambda s: (s.start, s.end))
    segments = _merge_same_city(stays)
    segments = _apply_day_convention(segments, markers, notes)

    for prev, cur in zip(segments, segments[1:]):
        if cur.start < prev.end and _norm(cur.city) != _norm(prev.city):
            notes.append(
                f"overlapping segments: {prev.city} ends day {prev.end}, "
                f"{cur.city} starts day {cur.start}"
            )
    if segments and segments[0].start != 1:
        notes.append(f"plan starts on day {segments[0].start}, not day 1")

    return Itinerary(
        segments=tuple(segments),
        notes=tuple(notes),
        flight_markers=tuple(markers),
    )


def _merge_same_city(stays: list[Segment]) -> list[Segment]:
    merged: list[Segment] = []
    for seg in stays:
        if (
            merged
            and _norm(merged[-1].city) == _norm(seg.city)
            and seg.start <= merged[-1].end + 1
        ):
            prev = merged.pop()
            merged.append(Segment(prev.start, max(prev.end, seg.end), prev.city))
        else:
            merged.append(seg)
    return merged


def _apply_day_convention(
    segments: list[Segment],
    markers: list[tuple[int, str | None, str]],
    notes: list[str],
) -> list[Segment]:
    """Convert disjoint consecutive ranges to shared flight days when an
    explicit flight marker disambiguates which day was spent traveling."""
    out = list(segments)
    for i in range(len(out) - 1):
        cur, nxt = out[i], out[i + 1]
        if nxt.start != cur.end + 1 or _norm(cur.city) == _norm(nxt.city):
            continue
        converted = False
        for day, _from_city, to_city in markers:
            if day == cur.end and _norm(to_city) == _norm(nxt.city):
                out[i + 1] = Segment(cur.end, nxt.end, nxt.city)
                converted = True
                break
            if day == nxt.start and _norm(to_city) == _norm(nxt.city):
                out[i] = Segment(cur.start, nxt.start, cur.city)
                converted = True
                break
        if not converted:
            notes.append(
                f"ambiguous day convention between {cur.city} (ends day {cur.end}) "
                f"and {nxt.city} (starts day {nxt.start})"
            )
    return out


def evaluate_constraints(
    query: TripQuery,
    plan: Itinerary,
    families: tuple[str, ...] = CONSTRAINT_FAMILIES,
) -> list[ConstraintOutcome]:
    """One outcome per extracted constraint, mechanically verified.

    Unparseable or empty plans are never an error: their constraints simply
    come back unsatisfied with an explanatory detail.
    """
    unknown = set(families) - set(CONSTRAINT_FAMILIES)
    if unknown:
        raise ValueError(f"unknown constraint families: {sorted(unknown)}")

    day_sets: dict[str, set[int]] = {}
    display: dict[str, str] = {}
    for seg in plan.segments:
        key = _norm(seg.city)
        day_sets.setdefault(key, set()).update(range(seg.start, seg.end + 1))
        display.setdefault(key, seg.city)

    outcomes: list[ConstraintOutcome] = []

    if "city_count" in families:
        n = len(day_sets)
        outcomes.append(ConstraintOutcome(
            kind="city_count",
            subject=None,
            satisfied=n == query.city_count,
            detail=f"plan visits {n} distinct cities, query requires {query.city_count}",
        ))

    if "total_days" in families:
        last_end = plan.segments[-1].end if plan.segments else 0
        outcomes.append(ConstraintOutcome(
            kind="total_days",
            subject=None,
            satisfied=bool(plan.segments) and last_end == query.total_days,
            detail=f"plan ends on day {last_end}, trip length is {query.total_days}",
        ))

    if "stay_duration" in families:
        for city, required in query.stays.items():
            got = len(day_sets.get(_norm(city), ()))
            outcomes.append(ConstraintOutcome(
                kind="stay_duration",
                subject=city,
                satisfied=got == required,
                detail=f"{city}: plan allocates {got} days, query requires {required}"
                       " (flight days count toward both cities)",
            ))

    if "event_window" in families:
        for city, (start, end) in query.events.items():
            covered = day_sets.get(_norm(city), set())
            missing = sorted(set(range(start, end + 1)) - covered)
            outcomes.append(ConstraintOutcome(
                kind="event_window",
                subject=city,
                satisfied=not missing,
                detail=(
                    f"{city} must cover days {start}-{end}"
                    + (f"; missing days {missing}" if missing else "; fully covered")
                ),
            ))

    if "flight_adjacency" in families:
        for prev, cur in zip(plan.segments, plan.segments[1:]):
            a, b = _norm(prev.city), _norm(cur.city)
            if a == b:
                continue
            pair = tuple(sorted((a, b)))
            ok = pair in query.flights
            outcomes.append(ConstraintOutcome(
                kind="flight_adjacency",
                subject=f"{prev.city}-{cur.city}",
                satisfied=ok,
                detail=(
                    f"leg {prev.city} -> {cur.city}: "
                    + ("direct flight available" if ok else "no direct flight listed")
                ),
            ))

    return outcomes


def csr(outcomes: list[ConstraintOutcome]) -> float:
    """Constraint satisfaction rate: satisfied / total."""
    if not outcomes:
        raise ValueError("no constraint outcomes to score")
    return sum(1 for o in outcomes if o.satisfied) / len(outcomes)


def score_plan_text(query: TripQuery, plan_text: str) -> float:
    """Parse a free-text plan and return its CSR against ``query``."""
    return csr(evaluate_constraints(query, parse_itinerary(plan_text)))
