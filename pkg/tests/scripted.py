"""Deterministic scripted model used to record and regenerate replay fixtures.

Behaves like a chat model with a fixed personality: trace requests get a
seeded word-salad reasoning trace, answer requests get a plan (or answer)
whose quality improves with the length of the reasoning prefix supplied.
Every response is a pure function of the request, so recorded fixtures are
reproducible byte for byte.
"""

from __future__ import annotations

import hashlib
import json
import random
from dataclasses import dataclass
from pathlib import Path

from anytime_eval.gateway import ChatExchange, ChatRequest

_BABBLE_WORDS = (
    "consider schedule ordering overlap flight day budget total city stay "
    "window constraint check feasible arrive depart between direct plan "
    "start end duration count remaining option backtrack verify adjust "
    "conference workshop show route leg swap extend shrink satisfy cover "
    "sum exceeds shared boundary counts toward both therefore next maybe "
    "first second third half twice careful retry 2 3 4 5 6 7 11 14 18"
).split()


def babble(context: str, seed: int, n_words: int) -> str:
    rng = random.Random(f"{hashlib.sha256(context.encode()).hexdigest()}:{seed}")
    return " ".join(rng.choice(_BABBLE_WORDS) for _ in range(n_words))


def _jitter(prefix: str) -> int:
    return int(hashlib.sha256(prefix.encode()).hexdigest()[:8], 16) % 301 - 150


@dataclass(frozen=True)
class ScriptedInstance:
    instance_id: str
    question: str
    good_answer: str
    medium_answer: str
    poor_answer: str


def _plain(segs) -> str:
    return " ".join(f"Day {s}-{e}: {c}." for s, e, c in segs)


_R1_SEGS = [(1, 3, "Vienna"), (3, 6, "Prague"), (6, 8, "Budapest"), (8, 11, "Krakow")]
_R1_QUERY = (
    "You plan to visit 4 European cities for 11 days in total. You only take "
    "direct flights to commute between cities. You plan to stay in Vienna for "
    "3 days. You have to attend a workshop in Vienna between day 1 and day 2. "
    "You would like to visit Prague for 4 days. You want to spend 3 days in "
    "Budapest. You plan to stay in Krakow for 4 days.\n"
    "Here are the cities that have direct flights:\n"
    "Vienna and Prague, Prague and Budapest, Budapest and Krakow, Vienna and Krakow.\n"
    "Find a trip plan of visiting the cities for 11 days by taking direct "
    "flights to commute between them."
)

_R2_SEGS = [(1, 4, "Lisbon"), (4, 6, "Madrid"), (6, 9, "Barcelona")]
_R2_QUERY = (
    "You plan to visit 3 European cities for 9 days in total. You only take "
    "direct flights to commute between cities. You plan to stay in Lisbon for "
    "4 days. You want to spend 3 days in Madrid. During day 7 and day 9, you "
    "have to attend a conference in Barcelona. You would like to visit "
    "Barcelona for 4 days.\n"
    "Here are the cities that have direct flights:\n"
    "Lisbon and Madrid, Madrid and Barcelona, Lisbon and Barcelona.\n"
    "Find a trip plan of visiting the cities for 9 days by taking direct "
    "flights to commute between them."
)


def _damaged(segs, extend_idx: int):
    medium = [list(s) for s in segs]
    medium[extend_idx][1] += 1
    poor = [tuple(s) for s in segs[:-1]]
    return _plain([tuple(s) for s in medium]), _plain(poor)


_R1_MEDIUM, _R1_POOR = _damaged(_R1_SEGS, 1)
_R2_MEDIUM, _R2_POOR = _damaged(_R2_SEGS, 1)

DEMO_INSTANCES = [
    ScriptedInstance("trip-r1", _R1_QUERY, _plain(_R1_SEGS), _R1_MEDIUM, _R1_POOR),
    ScriptedInstance("trip-r2", _R2_QUERY, _plain(_R2_SEGS), _R2_MEDIUM, _R2_POOR),
]


def write_demo_dataset(path: str | Path) -> None:
    lines = [
        json.dumps({"id": inst.instance_id, "question": inst.question},
                   ensure_ascii=False, sort_keys=True)
        for inst in DEMO_INSTANCES
    ]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


class ScriptedBackend:
    """Backend whose answers depend only on the request content."""

    def __init__(self, instances=None, trace_words: int = 880,
                 good_at: int = 550, medium_at: int = 250) -> None:
        self._by_question = {i.question: i for i in (instances or DEMO_INSTANCES)}
        self.trace_words = trace_words
        self.good_at = good_at
        self.medium_at = medium_at
        self.calls = 0

    def _instance(self, question: str) -> ScriptedInstance:
        inst = self._by_question.get(question)
        if inst is None:
            raise AssertionError(f"scripted backend has no script for: {question[:80]}...")
        return inst

    def complete(self, request: ChatRequest) -> ChatExchange:
        self.calls += 1
        user = request.messages[-1].content
        if "Reasoning so far:\n" in user:
            text = self._answer_text(user)
        else:
            text = self._trace_text(user, request.params.seed or 0)
        return ChatExchange(
            request=request,
            status="ok",
            text=text,
            content=text,
            finish_reason="stop",
            usage={"completion_tokens": len(text.split())},
        )

    def _trace_text(self, user: str, seed: int) -> str:
        n = self.trace_words + (seed * 7) % 40
        return babble(user, seed, n)

    def _answer_text(self, user: str) -> str:
        question, rest = user.split("\n\nReasoning so far:\n", 1)
        prefix = rest.rsplit("\n\n", 1)[0]
        target = question
        if "target problem: " in target:
            target = target.split("target problem: ", 1)[1]
        inst = self._instance(target)
        n_words = len(prefix.split())
        jitter = _jitter(prefix)
        if n_words >= self.good_at + jitter:
            return inst.good_answer
        if n_words >= self.medium_at + jitter:
            return inst.medium_answer
        return inst.poor_answer
