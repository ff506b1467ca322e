"""Final-answer extraction and exact-match scoring for math and MCQ tasks.

Scores are binary: 1 when the normalized prediction equals the normalized
gold answer, otherwise 0. Extraction takes the *last* explicit commitment
in the text, because answers forced from a truncated reasoning prefix often
restate candidates before settling.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional, Sequence

AIME = "aime"
GPQA = "gpqa"

# Explicit commitments: "the answer is 211", "Answer: 211", boxed values.
_INT_MARKERS = [
    re.compile(r"\\boxed\s*\{\s*\$?\s*(-?\d+)\s*\$?\s*\}"),
    re.compile(r"answer\s*(?:is|:|=)?\s*\**\(?\s*\$?(-?\d+)", re.IGNORECASE),
]
# Integers standing on their own (not part of a decimal like 3.14).
_STANDALONE_INT = re.compile(r"(?<![\d.])(\d+)(?!\.?\d)")

# Letter commitments are matched uppercase-only to avoid picking the 'a' of
# ordinary words after "answer is ...".
_LETTER_MARKERS = [
    re.compile(r"answer\s*(?:is|:|=)?\s*\**\(?([A-Z])\)?(?![A-Za-z])", re.IGNORECASE),
    re.compile(r"\boption\s*\**\(?([A-Z])\)?(?![A-Za-z])", re.IGNORECASE),
]


@dataclass(frozen=True)
class AnswerSpec:
    """Gold answer for one instance, plus the option list for MCQ tasks."""

    task_kind: str
    gold: str
    options: tuple[tuple[str, str], ...] | None = None

    def __post_init__(self) -> None:
        if self.task_kind == AIME:
            value = int(self.gold)
            if not 0 <= value <= 999:
                raise ValueError(f"integer answer out of range: {self.gold!r}")
        elif self.task_kind == GPQA:
            if not self.options:
                raise ValueError("multiple-choice spec needs options")
            letters = {letter.upper() for letter, _ in self.options}
            if self.gold.upper() not in letters:
                raise ValueError(
                    f"gold letter {self.gold!r} not among options {sorted(letters)}"
                )
        else:
            raise ValueError(f"unknown task kind {self.task_kind!r}")


def _last_marker_match(text: str, patterns) -> Optional[str]:
    best: tuple[int, str] | None = None
    for pat in patterns:
        for m in pat.finditer(text):
            if best is None or m.start() >= best[0]:
                best = (m.start(), m.group(1))
    return best[1] if best else None


def extract_final_answer(
    text: str,
    task_kind: str,
    options: Sequence[tuple[str, str]] | None = None,
) -> Optional[str]:
    """Pull the committed final answer out of free text, or None.

    Integer tasks fall back to the last standalone integer when no marker
    is present. Multiple-choice tasks fall back to matching the options'
    own text, for responses that state the value instead of the letter.
    """
    if task_kind == AIME:
        marked = _last_marker_match(text, _INT_MARKERS)
        if marked is not None:
            return marked
        ints = _STANDALONE_INT.findall(text)
        return ints[-1] if ints else None

    if task_kind == GPQA:
        letters = {letter.upper() for letter, _ in options} if options else None
        best: tuple[int, str] | None = None
        for pat in _LETTER_MARKERS:
            for m in pat.finditer(text):
                letter = m.group(1).upper()
                if letters is not None and letter not in letters:
                    continue
                if best is None or m.start() >= best[0]:
                    best = (m.start(), letter)
        if best is not None:
            return best[1]
        if options:
            # Last verbatim mention of any option's text wins.
            folded = text.casefold()
            for letter, opt_text in sorted(options):
                needle = opt_text.strip().casefold()
                if not needle:
                    continue
                pos = folded.rfind(needle)
                if pos >= 0 and (best is None or pos > best[0]):
                    best = (pos, letter.upper())
        return best[1] if best else None

    raise ValueError(f"unknown task kind {task_kind!r}")


def normalize_answer(answer: str, task_kind: str) -> str:
    """Canonical form: decimal integer without leading zeros, or one uppercase letter."""
    if task_kind == AIME:
        m = re.search(r"-?\d+", answer)
        return str(int(m.group())) if m else answer.strip()
    if task_kind == GPQA:
        stripped = re.sub(r"[^A-Za-z]", "", answer)
        return stripped[:1].upper() if stripped else answer.strip().upper()
    raise ValueError(f"unknown task kind {task_kind!r}")


def score_answer(pred: Optional[str], spec: AnswerSpec) -> int:
    """1 on exact normalized match, 0 otherwise; a missing prediction is 0."""
    if pred is None:
        return 0
    return int(
        normalize_answer(pred, spec.task_kind)
        == normalize_answer(spec.gold, spec.task_kind)
    )
