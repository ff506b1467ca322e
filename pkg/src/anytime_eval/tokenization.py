"""Reasoning-token counting and budget-exact prefix truncation.

Budget semantics must be reproducible, so the tokenizer is an explicit,
immutable object recorded in every run manifest. Two kinds are built in:

* ``words`` — a Unicode word splitter (maximal ``\\S+`` runs). Needs no
  data files; used for offline tests and model-agnostic runs.
* ``bpe`` — byte-level byte-pair encoding driven by a standard vocabulary
  file (token -> id JSON) and merge-rank file, for fidelity to a specific
  model's token accounting.

Truncation always returns a character-level prefix of the input and never
splits inside a multi-byte character: the cut is snapped to the end of the
last complete token, and any trailing incomplete UTF-8 sequence produced by
a byte-level token boundary is dropped.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import regex as re


class TokenizerConfigError(ValueError):
    """Tokenizer files missing or malformed."""


@dataclass(frozen=True)
class TokenizerSpec:
    """Declarative tokenizer choice, as stored in run manifests."""

    kind: str = "words"
    vocab_file: str | None = None
    merges_file: str | None = None

    def load(self) -> "Tokenizer":
        if self.kind == "words":
            return WordTokenizer()
        if self.kind == "bpe":
            if not self.vocab_file or not self.merges_file:
                raise TokenizerConfigError(
                    "bpe tokenizer needs both vocab_file and merges_file"
                )
            return BpeTokenizer.from_files(self.vocab_file, self.merges_file)
        raise TokenizerConfigError(f"unknown tokenizer kind {self.kind!r}")

    def as_dict(self) -> dict:
        return {
            "kind": self.kind,
            "vocab_file": self.vocab_file,
            "merges_file": self.merges_file,
        }


@dataclass(frozen=True)
class TruncatedPrefix:
    """A budget cut of a trace: the longest prefix within ``budget`` tokens."""

    text: str
    token_count: int
    budget: int
    exhausted: bool  # the full source text fit within the budget


class WordTokenizer:
    """Counts maximal runs of non-whitespace characters."""

    _WORD = re.compile(r"\S+")

    def count(self, text: str) -> int:
        return sum(1 for _ in self._WORD.finditer(text))

    def prefix_end_offsets(self, text: str) -> list[int]:
        """Character offset just past each token, in order."""
        return [m.end() for m in self._WORD.finditer(text)]


def _bytes_to_unicode() -> dict[int, str]:
    """Reversible byte -> printable-unicode map used by byte-level BPE."""
    bs = (
        list(range(ord("!"), ord("~") + 1))
        + list(range(ord("¡"), ord("¬") + 1))
        + list(range(ord("®"), ord("ÿ") + 1))
    )
    cs = bs[:]
    n = 0
    for b in range(256):
        if b not in bs:
            bs.append(b)
            cs.append(256 + n)
            n += 1
    return dict(zip(bs, (chr(c) for c in cs)))


class BpeTokenizer:
    """Byte-level BPE over a vocabulary + merge-rank file pair.

    Pre-tokenizes with the conventional contraction/letter/number/punct
    pattern, maps each chunk's bytes to printable symbols, then applies
    merges lowest-rank-first. Instances are immutable after load and safe
    to share across threads.
    """

    _PRETOKEN = re.compile(
        r"""'s|'t|'re|'ve|'m|'ll|'d| ?\p{L}+| ?\p{N}+| ?[^\s\p{L}\p{N}]+|\s+(?!\S)|\s+"""
    )

    def __init__(self, vocab: dict[str, int], merges: list[tuple[str, str]]) -> None:
        self._vocab = dict(vocab)
        self._ranks = {pair: i for i, pair in enumerate(merges)}
        self._byte_encoder = _bytes_to_unicode()
        self._cache: dict[str, tuple[str, ...]] = {}

    @classmethod
    def from_files(cls, vocab_file: str, merges_file: str) -> "BpeTokenizer":
        try:
            vocab = json.loads(Path(vocab_file).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise TokenizerConfigError(f"cannot load vocab {vocab_file}: {exc}") from exc
        try:
            lines = Path(merges_file).read_text(encoding="utf-8").splitlines()
        except OSError as exc:
            raise TokenizerConfigError(f"cannot load merges {merges_file}: {exc}") from exc
        merges: list[tuple[str, str]] = []
        for line in lines:
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 2:
                raise TokenizerConfigError(f"bad merge line in {merges_file}: {line!r}")
            merges.append((parts[0], parts[1]))
        return cls(vocab, merges)

    def _bpe(self, chunk_symbols: str) -> tuple[str, ...]:
        cached = self._cache.get(chunk_symbols)
        if cached is not None:
            return cached
        word: tuple[str, ...] = tuple(chunk_symbols)
        while len(word) > 1:
            pairs = set(zip(word, word[1:]))
            bigram = min(pairs, key=lambda p: self._ranks.get(p, float("inf")))
            if bigram not in self._ranks:
                break
            first, second = bigram
            merged: list[str] = []
            i = 0
            while i < len(word):
                if i < len(word) - 1 and word[i] == first and word[i + 1] == second:
                    merged.append(first + second)
                    i += 2
                else:
                    merged.append(word[i])
                    i += 1
            word = tuple(merged)
        self._cache[chunk_symbols] = word
        return word

    def _chunk_tokens(self, chunk: str) -> tuple[str, ...]:
        symbols = "".join(self._byte_encoder[b] for b in chunk.encode("utf-8"))
        return self._bpe(symbols)

    def count(self, text: str) -> int:
        return sum(
            len(self._chunk_tokens(m.group())) for m in self._PRETOKEN.finditer(text)
        )

    def encode(self, text: str) -> list[int]:
        """Token ids, for cross-checking against other loaders of the same files."""
        ids: list[int] = []
        for m in self._PRETOKEN.finditer(text):
            for tok in self._chunk_tokens(m.group()):
                ids.append(self._vocab[tok])
        return ids

    def prefix_end_offsets(self, text: str) -> list[int]:
        """Character offset just past each token, snapped to complete characters."""
        offsets: list[int] = []
        for m in self._PRETOKEN.finditer(text):
            chunk = m.group()
            chunk_bytes = chunk.encode("utf-8")
            consumed = 0
            for tok in self._chunk_tokens(chunk):
                consumed += len(tok)  # one symbol per source byte
                # A byte-level token may end mid-character; decoding with
                # the tail dropped yields the longest complete-char prefix.
                prefix_chars = len(
                    chunk_bytes[:consumed].decode("utf-8", errors="ignore")
                )
                offsets.append(m.start() + prefix_chars)
        return offsets


Tokenizer = WordTokenizer | BpeTokenizer


@lru_cache(maxsize=8)
def load_tokenizer(spec: TokenizerSpec) -> Tokenizer:
    """Load (and memoize) the tokenizer described by ``spec``."""
    return spec.load()


def count_tokens(text: str, tokenizer: Tokenizer) -> int:
    """Deterministic token count; empty text counts zero."""
    return tokenizer.count(text)


def truncate_prefix(text: str, budget: int, tokenizer: Tokenizer) -> TruncatedPrefix:
    """Longest character prefix of ``text`` whose token count fits ``budget``.

    Cuts are made at token end offsets of the full text's tokenization; the
    reported ``token_count`` is the count of the returned prefix itself, so
    the budget holds even when re-tokenizing the cut text merges tokens
    differently.
    """
    if budget < 1:
        raise ValueError(f"budget must be >= 1, got {budget}")
    offsets = tokenizer.prefix_end_offsets(text)
    total = len(offsets)
    if total <= budget:
        return TruncatedPrefix(text=text, token_count=total, budget=budget, exhausted=True)
    k = budget
    while k > 0:
        prefix = text[: offsets[k - 1]]
        n = tokenizer.count(prefix)
        if n <= budget:
            return TruncatedPrefix(text=prefix, token_count=n, budget=budget, exhausted=False)
        k -= 1
    return TruncatedPrefix(text="", token_count=0, budget=budget, exhausted=False)
