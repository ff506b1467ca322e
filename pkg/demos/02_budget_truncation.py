"""Cutting a reasoning trace at token-budget checkpoints.

A budget cut is always an exact character prefix of the trace: counting and
cutting are reproducible, nested, and never split a multi-byte character.

Run from the repository root:  python demos/02_budget_truncation.py
"""

from anytime_eval import BpeTokenizer, WordTokenizer, count_tokens, truncate_prefix

TRACE = (
    "We need to schedule 18 days total. Tallinn hosts the workshop on days "
    "1-4 and has a 4-day stay, so it must come first. Bucharest's show runs "
    "days 6-10 and Dublin's conference days 10-14, which pins both stays "
    "exactly. The remaining 2-day cities have to bridge day 4 to day 6: "
    "Prague then Budapest works because direct flights exist for every leg. "
    "Total stay days sum to 23, five more than 18, matching the five shared "
    "flight days. Split takes the final stretch, days 14-18, arriving from "
    "Dublin. ✈️ Checking each constraint once more before writing the plan."
) * 3

word_tok = WordTokenizer()
print(f"trace length: {count_tokens(TRACE, word_tok)} words\n")

print("word-splitter cuts:")
for budget in (20, 40, 80, 160):
    cut = truncate_prefix(TRACE, budget, word_tok)
    tail = cut.text[-34:].replace("\n", " ")
    print(f"  budget {budget:>4}: {cut.token_count:>3} tokens, "
          f"exhausted={cut.exhausted}  ...{tail!r}")

# The same trace under the bundled byte-level BPE vocabulary. BPE counts
# run higher than word counts because words split into subword pieces.
bpe = BpeTokenizer.from_files("fixtures/bpe/vocab.json", "fixtures/bpe/merges.txt")
print(f"\nBPE tokens for the same trace: {count_tokens(TRACE, bpe)}")
print("byte-level BPE cuts:")
prev = ""
for budget in (50, 100, 200, 400):
    cut = truncate_prefix(TRACE, budget, bpe)
    assert cut.text.startswith(prev), "cuts must nest"
    assert TRACE.startswith(cut.text), "cuts are exact prefixes"
    prev = cut.text
    print(f"  budget {budget:>4}: {cut.token_count:>3} tokens, "
          f"{len(cut.text):>4} chars")
print("\nnesting and prefix fidelity verified for every cut")
