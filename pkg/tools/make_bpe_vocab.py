#!/usr/bin/env python3
"""Train the small bundled byte-level BPE vocabulary.

Produces fixtures/bpe/vocab.json and fixtures/bpe/merges.txt in the
standard vocabulary + merge-rank format. Deterministic: re-running this
script reproduces the files byte for byte.
"""

from __future__ import annotations

import json
from collections import Counter
from pathlib import Path

from anytime_eval.tokenization import BpeTokenizer, _bytes_to_unicode

N_MERGES = 600

CORPUS = """
You plan to visit 6 European cities for 18 days in total. You only take direct
flights to commute between cities. You plan to stay in Bucharest for 5 days.
From day 6 to day 10, there is an annual show you want to attend in Bucharest.
You would like to visit Prague for 2 days. You want to spend 2 days in Budapest.
We need to schedule 18 days total across the cities. The workshop in Tallinn
runs between day 1 and day 4, and the conference in Dublin happens during day
10 and day 14. Total days sum to 23, which exceeds 18, so stays must overlap on
flight days: the day of a flight counts toward both the departure city and the
arrival city. Day 1-4: Tallinn. Day 4-5: Prague. Day 5-6: Budapest. Day 6-10:
Bucharest. Day 10-14: Dublin. Day 14-18: Split.
Let k be an integer with 1 <= k <= 999. We need to count the integers n such
that n = a*b + c where 0 <= c < b and 1 <= a <= b - 1. The condition simplifies
to d | k(k-1), so k = 0 or 1 modulo each prime power dividing d. By the Chinese
remainder theorem the number of solutions is 2^r, where r counts the distinct
prime factors. The smallest product of four distinct primes is 2*3*5*7 = 210,
so the answer is 211. Answer: 211.
The mixture decolorizes bromine water, so it contains alkenes. Hydrogenation
under severe conditions gives a hydrocarbon with hydrogen mass fraction 14.28%,
which matches cyclohexane: 12/84 = 0.1429. Therefore the answer is option A.
Budget checkpoints 100, 200, 300, 400, 500, 600, 700, 800 cover the typical
reasoning lengths; 1600 tokens suffices for longer problems. Quality rises
from 0.2 through 0.5 toward 0.9 as the budget grows, and the running maximum
never decreases. Satisfaction Rate: 80.0% means Satisfied: 8/10 constraints.
A canny traveler weighs cost, time, and comfort; itineraries through Krakow,
Malaga, Zurich, and Reykjavik need care with connections. Cafes in Vienna,
fjords near Oslo, tapas in Seville -- each stop earns its days. Numbers like
3.14159 and 2,048 and dates like 2024-06-30 appear in reasoning traces, as do
fractions 13/16 and percentages 95%. "Quoted phrases", (parentheses), and
symbols #, $, &, @ all occur. Mixed tokens: don't, can't, we'll, it's, o'clock.
"""


def train(corpus: str, n_merges: int) -> tuple[dict[str, int], list[tuple[str, str]]]:
    byte_encoder = _bytes_to_unicode()
    pretoken = BpeTokenizer._PRETOKEN

    words: Counter[tuple[str, ...]] = Counter()
    for chunk in pretoken.findall(corpus):
        words[tuple(byte_encoder[b] for b in chunk.encode("utf-8"))] += 1

    vocab: dict[str, int] = {}
    for sym in sorted(byte_encoder.values(), key=ord):
        vocab[sym] = len(vocab)

    merges: list[tuple[str, str]] = []
    for _ in range(n_merges):
        pairs: Counter[tuple[str, str]] = Counter()
        for word, freq in words.items():
            for a, b in zip(word, word[1:]):
                pairs[(a, b)] += freq
        if not pairs:
            break
        # Highest frequency wins; ties break lexicographically for determinism.
        best, best_freq = max(pairs.items(), key=lambda kv: (kv[1], kv[0]))
        if best_freq < 2:
            break
        merges.append(best)
        vocab[best[0] + best[1]] = len(vocab)
        new_words: Counter[tuple[str, ...]] = Counter()
        for word, freq in words.items():
            out: list[str] = []
            i = 0
            while i < len(word):
                if i < len(word) - 1 and (word[i], word[i + 1]) == best:
                    out.append(word[i] + word[i + 1])
                    i += 2
                else:
                    out.append(word[i])
                    i += 1
            new_words[tuple(out)] += freq
        words = new_words
    return vocab, merges


def main() -> None:
    out_dir = Path(__file__).resolve().parents[1] / "fixtures" / "bpe"
    out_dir.mkdir(parents=True, exist_ok=True)
    vocab, merges = train(CORPUS, N_MERGES)
    (out_dir / "vocab.json").write_text(
        json.dumps(vocab, ensure_ascii=False, indent=0, sort_keys=False) + "\n",
        encoding="utf-8",
    )
    (out_dir / "merges.txt").write_text(
        "#version: 0.2\n" + "".join(f"{a} {b}\n" for a, b in merges),
        encoding="utf-8",
    )
    print(f"wrote {len(vocab)} vocab entries, {len(merges)} merges to {out_dir}")


if __name__ == "__main__":
    main()
