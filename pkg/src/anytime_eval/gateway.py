"""Chat-completions client with retries, bounded fan-out, and record/replay.

One client covers every OpenAI-compatible endpoint. All traffic is keyed by
a stable hash of (messages, sampling params, model), which drives both the
append-only fixture store and the replay backend: a run recorded once can
be re-executed offline, byte for byte.
"""

from __future__ import annotations

import json
import logging
import os
import re
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterator, Optional, Protocol, Sequence

import httpx

from .jsonutil import canonical_json, content_key

log = logging.getLogger(__name__)


class GatewayError(RuntimeError):
    """Base class for request failures surfaced to callers."""


class AuthError(GatewayError):
    """Credential rejected; retrying cannot help."""


class ContextLengthError(GatewayError):
    """Request exceeds the model's context window; retrying cannot help."""


class TransientError(GatewayError):
    """Rate limit, timeout, or server-side failure; retryable up to the cap."""


class ReplayMissError(GatewayError):
    """Replay backend has no fixture for this request."""


class FixtureIntegrityError(GatewayError):
    """Two different payloads claim the same request key."""


@dataclass(frozen=True)
class SamplingParams:
    """Decoding parameters sent with every request.

    ``top_k`` is omitted from requests unless explicitly set: most chat
    APIs reject it, and top_k=1 would collapse the diversity that multi-
    trace sampling depends on.
    """

    temperature: float = 0.7
    top_p: float = 1.0
    top_k: int | None = None
    max_tokens: int = 4096
    seed: int | None = None

    def __post_init__(self) -> None:
        if self.temperature < 0:
            raise ValueError(f"temperature must be >= 0, got {self.temperature}")
        if not 0 < self.top_p <= 1:
            raise ValueError(f"top_p must be in (0, 1], got {self.top_p}")
        if self.max_tokens < 1:
            raise ValueError(f"max_tokens must be >= 1, got {self.max_tokens}")

    def as_dict(self) -> dict:
        return {
            "temperature": self.temperature,
            "top_p": self.top_p,
            "top_k": self.top_k,
            "max_tokens": self.max_tokens,
            "seed": self.seed,
        }


@dataclass(frozen=True)
class Message:
    role: str
    content: str

    def as_dict(self) -> dict:
        return {"role": self.role, "content": self.content}


@dataclass(frozen=True)
class ChatRequest:
    model: str
    messages: tuple[Message, ...]
    params: SamplingParams = field(default_factory=SamplingParams)

    def as_dict(self) -> dict:
        return {
            "model": self.model,
            "messages": [m.as_dict() for m in self.messages],
            "params": self.params.as_dict(),
        }

    @property
    def key(self) -> str:
        return content_key(self.as_dict())


@dataclass(frozen=True)
class ChatExchange:
    """One request/response round trip, success or failure."""

    request: ChatRequest
    status: str  # "ok" | "error"
    text: str | None = None  # reasoning channel (if any) + visible content
    content: str | None = None
    reasoning: str | None = None
    finish_reason: str | None = None
    usage: dict | None = None
    duration_s: float = 0.0
    attempt_count: int = 1
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.status == "ok"

    def response_dict(self) -> dict:
        return {
            "text": self.text,
            "content": self.content,
            "reasoning": self.reasoning,
            "finish_reason": self.finish_reason,
            "usage": self.usage,
        }


def exchange_from_response(request: ChatRequest, response: dict,
                           duration_s: float = 0.0, attempt_count: int = 1) -> ChatExchange:
    return ChatExchange(
        request=request,
        status="ok",
        text=response.get("text"),
        content=response.get("content"),
        reasoning=response.get("reasoning"),
        finish_reason=response.get("finish_reason"),
        usage=response.get("usage"),
        duration_s=duration_s,
        attempt_count=attempt_count,
    )


class FixtureStore:
    """Append-only JSONL of request/response pairs keyed by request hash.

    Appends are serialized through one lock; records are written in
    canonical JSON so re-serializing the file is byte-identical.
    """

    def __init__(self, path: str | Path) -> None:
        self.path = Path(path)
        self._index: dict[str, dict] = {}
        self._lock = threading.Lock()
        if self.path.exists():
            for line_no, line in enumerate(self.path.read_text(encoding="utf-8").splitlines(), 1):
                if not line.strip():
                    continue
                record = json.loads(line)
                self._check_and_add(record, f"{self.path}:{line_no}")

    def _check_and_add(self, record: dict, where: str) -> bool:
        key = record["key"]
        existing = self._index.get(key)
        if existing is not None:
            if canonical_json(existing) != canonical_json(record):
                raise FixtureIntegrityError(
                    f"conflicting payloads for key {key} at {where}"
                )
            return False
        self._index[key] = record
        return True

    def __len__(self) -> int:
        return len(self._index)

    def lookup(self, request: dict) -> Optional[dict]:
        """Response for an exact request match, or None."""
        record = self._index.get(content_key(request))
        return record["response"] if record else None

    def record(self, request: dict, response: dict) -> str:
        """Append one exchange; duplicate identical records are skipped."""
        record = {"key": content_key(request), "request": request, "response": response}
        with self._lock:
            if self._check_and_add(record, "record()"):
                self.path.parent.mkdir(parents=True, exist_ok=True)
                with self.path.open("a", encoding="utf-8") as fh:
                    fh.write(canonical_json(record) + "\n")
        return record["key"]

    def records(self) -> list[dict]:
        return list(self._index.values())


class Backend(Protocol):
    def complete(self, request: ChatRequest) -> ChatExchange: ...


class ReplayBackend:
    """Deterministic backend answering only from a fixture store."""

    def __init__(self, store: FixtureStore) -> None:
        self.store = store

    def complete(self, request: ChatRequest) -> ChatExchange:
        response = self.store.lookup(request.as_dict())
        if response is None:
            raise ReplayMissError(
                f"no fixture for request key {request.key} (model={request.model})"
            )
        return exchange_from_response(request, response)


_CONTEXT_LENGTH_HINT = re.compile(
    r"context[ _-]?length|maximum context|too many tokens|reduce the length",
    re.IGNORECASE,
)


class HttpBackend:
    """Live HTTP client for any OpenAI-compatible chat-completions endpoint.

    Transient failures (429, 408, 5xx, network timeouts) are retried with
    exponential backoff up to ``max_attempts``; credential and context-
    length failures are surfaced immediately.
    """

    def __init__(
        self,
        base_url: str,
        api_key_env: str = "OPENAI_API_KEY",
        timeout_s: float = 120.0,
        max_attempts: int = 4,
        backoff_base_s: float = 1.0,
        backoff_cap_s: float = 30.0,
        sleeper: Callable[[float], None] = time.sleep,
    ) -> None:
        self.base_url = base_url.rstrip("/")
        self.api_key_env = api_key_env
        self.max_attempts = max_attempts
        self.backoff_base_s = backoff_base_s
        self.backoff_cap_s = backoff_cap_s
        self._sleep = sleeper
        self._client = httpx.Client(timeout=timeout_s)

    def backoff_delay(self, attempt: int) -> float:
        """Delay before retrying after ``attempt`` failures; non-decreasing."""
        return min(self.backoff_base_s * (2 ** (attempt - 1)), self.backoff_cap_s)

    def _payload(self, request: ChatRequest) -> dict:
        p = request.params
        payload = {
            "model": request.model,
            "messages": [m.as_dict() for m in request.messages],
            "temperature": p.temperature,
            "top_p": p.top_p,
            "max_tokens": p.max_tokens,
        }
        if p.seed is not None:
            payload["seed"] = p.seed
        if p.top_k is not None:
            payload["top_k"] = p.top_k
        return payload

    def complete(self, request: ChatRequest) -> ChatExchange:
        if not request.messages:
            raise GatewayError("request has no messages")
        api_key = os.environ.get(self.api_key_env, "")
        headers = {"Authorization": f"Bearer {api_key}"} if api_key else {}
        url = f"{self.base_url}/chat/completions"
        payload = self._payload(request)
        started = time.monotonic()
        last_error: GatewayError | None = None

        for attempt in range(1, self.max_attempts + 1):
            try:
                resp = self._client.post(url, json=payload, headers=headers)
            except httpx.TransportError as exc:
                last_error = TransientError(f"transport failure: {exc}")
            else:
                if resp.status_code == 200:
                    return self._parse(request, resp.json(),
                                       time.monotonic() - started, attempt)
                if resp.status_code in (401, 403):
                    raise AuthError(f"authentication failed ({resp.status_code}): {resp.text[:200]}")
                body = resp.text
                if resp.status_code == 400 and _CONTEXT_LENGTH_HINT.search(body):
                    size = sum(len(m.content) for m in request.messages)
                    raise ContextLengthError(
                        f"context length exceeded for request of {size} chars, "
                        f"{len(request.messages)} messages: {body[:200]}"
                    )
                if resp.status_code in (408, 429) or resp.status_code >= 500:
                    last_error = TransientError(f"HTTP {resp.status_code}: {body[:200]}")
                else:
                    raise GatewayError(f"HTTP {resp.status_code}: {body[:200]}")
            if attempt < self.max_attempts:
                delay = self.backoff_delay(attempt)
                log.info("retrying after %s (attempt %d/%d, sleeping %.1fs)",
                         last_error, attempt, self.max_attempts, delay)
                self._sleep(delay)
        raise last_error if last_error else GatewayError("request failed")

    def _parse(self, request: ChatRequest, data: dict,
               duration_s: float, attempt: int) -> ChatExchange:
        choices = data.get("choices") or []
        if not choices:
            raise GatewayError(f"response has no choices: {canonical_json(data)[:200]}")
        message = choices[0].get("message") or {}
        content = message.get("content") or ""
        # Reasoning models expose their trace on a separate channel; the
        # budget applies to that text, so it goes ahead of the visible answer.
        reasoning = message.get("reasoning_content") or message.get("reasoning")
        text = f"{reasoning}\n{content}" if reasoning else content
        return ChatExchange(
            request=request,
            status="ok",
            text=text,
            content=content,
            reasoning=reasoning,
            finish_reason=choices[0].get("finish_reason"),
            usage=data.get("usage"),
            duration_s=duration_s,
            attempt_count=attempt,
        )

    def close(self) -> None:
        self._client.close()


class Gateway:
    """Shareable front door: caching, recording, and bounded fan-out.

    With a store attached, previously recorded requests are answered from
    the store (making interrupted runs resumable without re-sampling) and
    new successful exchanges are appended to it.
    """

    def __init__(self, backend: Backend, store: FixtureStore | None = None,
                 reuse_recorded: bool = True) -> None:
        self.backend = backend
        self.store = store
        self.reuse_recorded = reuse_recorded

    def complete(self, request: ChatRequest) -> ChatExchange:
        if self.store is not None and self.reuse_recorded:
            response = self.store.lookup(request.as_dict())
            if response is not None:
                return exchange_from_response(request, response)
        exchange = self.backend.complete(request)
        if self.store is not None and exchange.ok:
            self.store.record(request.as_dict(), exchange.response_dict())
        return exchange

    def _complete_or_error(self, request: ChatRequest) -> ChatExchange:
        try:
            return self.complete(request)
        except GatewayError as exc:
            return ChatExchange(request=request, status="error", error=str(exc))

    def iter_complete(self, requests: Sequence[ChatRequest],
                      max_in_flight: int = 4) -> Iterator[ChatExchange]:
        """Results in request order; at most ``max_in_flight`` outstanding.

        Per-request failures come back as error exchanges in their slot and
        do not abort the other requests.
        """
        if max_in_flight < 1:
            raise ValueError(f"max_in_flight must be >= 1, got {max_in_flight}")
        pool = ThreadPoolExecutor(max_workers=max_in_flight)
        try:
            futures = [pool.submit(self._complete_or_error, r) for r in requests]
            for fut in futures:
                yield fut.result()
        finally:
            pool.shutdown(wait=True, cancel_futures=True)

    def complete_many(self, requests: Sequence[ChatRequest],
                      max_in_flight: int = 4) -> list[ChatExchange]:
        return list(self.iter_complete(requests, max_in_flight))
