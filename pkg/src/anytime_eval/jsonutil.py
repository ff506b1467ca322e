"""Canonical JSON serialization and content hashing.

Everything persisted by this package (fixture stores, result rows, run
summaries) goes through ``canonical_json`` so that re-serializing a record
is byte-identical and content hashes are stable across runs and platforms.
"""

from __future__ import annotations

import hashlib
import json
from typing import Any


def canonical_json(obj: Any) -> str:
    """Serialize ``obj`` with sorted keys and no whitespace."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def sha256_hex(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def content_key(obj: Any) -> str:
    """Stable hex digest of a JSON-serializable object."""
    return sha256_hex(canonical_json(obj))
