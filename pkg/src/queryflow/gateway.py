"""Uniform boundary over chat-completion backends.

Callers build an LlmRequest and get back exactly ``n_samples`` texts, whether
the backend is the offline mock or a live chat-completions endpoint. The
gateway owns retries (transport failures only, never 4xx), a wall-clock
timeout, bounded in-flight parallelism, and an observable per-backend call
counter that tools also report into, so a whole pipeline run can be audited
for "how many backend calls happened".

Mock fixtures are JSONL rows ``{"key": ..., "responses": [...]}`` where key is
``<template id>|<FNV-1a 64-bit hex of the whitespace-normalized prompt>``. The
hash alone resolves lookups; the template id prefix keeps collisions
debuggable. Prompts with no fixture deliberately return a loud
``UNSCRIPTED:`` text instead of failing, so a broken fixture set shows up in
assertions rather than as silent errors.
"""

from __future__ import annotations

import logging
import json
import os
import threading
import time
from dataclasses import dataclass
from pathlib import Path

import requests

from .errors import BackendUnavailable, Timeout, UnknownBackend

log = logging.getLogger(__name__)

UNSCRIPTED_PREFIX = "UNSCRIPTED: "

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_MASK64 = 0xFFFFFFFFFFFFFFFF

DEFAULT_TIMEOUT_S = 30.0
DEFAULT_MAX_PARALLEL = 4
RETRY_SLEEPS_S = (0.25, 1.0)


def fnv1a64(data: bytes) -> int:
    """64-bit FNV-1a. Stable across platforms and processes."""
    value = _FNV_OFFSET
    for byte in data:
        value ^= byte
        value = (value * _FNV_PRIME) & _MASK64
    return value


def prompt_hash(prompt: str) -> str:
    """Hex digest of the prompt with whitespace runs collapsed."""
    normalized = " ".join(prompt.split())
    return f"{fnv1a64(normalized.encode('utf-8')):016x}"


def fixture_key(template_id: str, prompt: str) -> str:
    return f"{template_id}|{prompt_hash(prompt)}"


@dataclass(frozen=True)
class LlmRequest:
    prompt: str
    temperature: float = 0.0
    max_tokens: int = 512
    n_samples: int = 1
    backend_id: str = "mock"

    def __post_init__(self):
        if not self.prompt:
            raise ValueError("prompt must be non-empty")
        if not 0.0 <= self.temperature <= 2.0:
            raise ValueError("temperature must be within [0, 2]")
        if self.max_tokens <= 0:
            raise ValueError("max_tokens must be positive")
        if self.n_samples <= 0:
            raise ValueError("n_samples must be positive")
        # sampling several chains at temperature 0 would just repeat one chain
        if self.n_samples >= 2 and self.temperature <= 0.0:
            raise ValueError("n_samples >= 2 requires temperature > 0")


@dataclass(frozen=True)
class LlmResponse:
    texts: tuple[str, ...]
    backend_id: str
    latency_ms: int
    from_mock: bool

    def __post_init__(self):
        if not self.texts:
            raise ValueError("texts must be non-empty")
        if self.latency_ms < 0:
            raise ValueError("latency_ms must be >= 0")


class CallCounter:
    """Thread-safe per-backend call tally, shared by the gateway and tools."""

    def __init__(self):
        self._lock = threading.Lock()
        self._counts: dict[str, int] = {}

    def increment(self, backend_id: str) -> None:
        with self._lock:
            self._counts[backend_id] = self._counts.get(backend_id, 0) + 1

    def counts(self) -> dict[str, int]:
        with self._lock:
            return dict(self._counts)

    def total(self) -> int:
        with self._lock:
            return sum(self._counts.values())

    def reset(self) -> None:
        # test hook; production code never rewinds accounting
        with self._lock:
            self._counts.clear()


class MockLlmBackend:
    """Fixture-driven backend; bit-reproducible for identical requests."""

    is_mock = True

    def __init__(self, delay_s: float = 0.0):
        self.delay_s = delay_s
        self._by_hash: dict[str, list[str]] = {}
        self._keys: dict[str, str] = {}

    def add_entry(self, key: str, responses: list[str]) -> None:
        if not responses:
            raise ValueError(f"fixture {key!r} has no responses")
        digest = key.rsplit("|", 1)[-1]
        self._by_hash[digest] = list(responses)
        self._keys[digest] = key

    def script(self, template_id: str, prompt: str, responses: list[str]) -> str:
        """Register responses for a prompt; returns the fixture key."""
        key = fixture_key(template_id, prompt)
        self.add_entry(key, responses)
        return key

    def load_file(self, path: Path) -> int:
        count = 0
        for line_no, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
            if not line.strip():
                continue
            try:
                row = json.loads(line)
                self.add_entry(row["key"], row["responses"])
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise ValueError(f"{path}: line {line_no}: bad fixture row ({exc})") from exc
            count += 1
        return count

    @classmethod
    def from_dir(cls, fixture_dir: Path | None, delay_s: float = 0.0) -> "MockLlmBackend":
        backend = cls(delay_s=delay_s)
        if fixture_dir is not None and Path(fixture_dir).is_dir():
            for file in sorted(Path(fixture_dir).glob("*.jsonl")):
                backend.load_file(file)
        return backend

    def generate(self, request: LlmRequest, timeout_s: float) -> list[str]:
        if self.delay_s > timeout_s:
            # honor the bound without actually hanging the caller
            raise Timeout(f"mock delayed {self.delay_s}s beyond the {timeout_s}s bound")
        if self.delay_s > 0:
            time.sleep(self.delay_s)
        responses = self._by_hash.get(prompt_hash(request.prompt))
        if responses is None:
            return [UNSCRIPTED_PREFIX + request.prompt[:40]] * request.n_samples
        return [responses[i % len(responses)] for i in range(request.n_samples)]


class HttpLlmBackend:
    """Chat-completions endpoint speaking the common OpenAI-style contract.

    Credentials and routing come from the environment at call time
    (LLM_API_KEY, LLM_API_BASE, LLM_MODEL) and are never stored or logged.
    """

    is_mock = False

    def __init__(self, session: requests.Session | None = None):
        self._session = session or requests.Session()

    def generate(self, request: LlmRequest, timeout_s: float) -> list[str]:
        api_base = os.environ.get("LLM_API_BASE", "https://api.openai.com/v1")
        model = os.environ.get("LLM_MODEL", "gpt-4o")
        api_key = os.environ.get("LLM_API_KEY", "")
        headers = {"Content-Type": "application/json"}
        if api_key:
            headers["Authorization"] = f"Bearer {api_key}"
        payload = {
            "model": model,
            "messages": [{"role": "user", "content": request.prompt}],
            "temperature": request.temperature,
            "max_tokens": request.max_tokens,
            "n": request.n_samples,
        }
        try:
            resp = self._session.post(
                api_base.rstrip("/") + "/chat/completions",
                json=payload, headers=headers, timeout=timeout_s,
            )
        except requests.Timeout as exc:
            raise Timeout(f"llm call exceeded {timeout_s}s") from exc
        except requests.RequestException as exc:
            raise BackendUnavailable(f"llm transport failure: {exc}", retryable=True) from exc
        if resp.status_code >= 500:
            raise BackendUnavailable(f"llm backend returned {resp.status_code}", retryable=True)
        if resp.status_code >= 400:
            # client errors are never retried
            raise BackendUnavailable(f"llm backend rejected the request ({resp.status_code})")
        try:
            choices = resp.json()["choices"]
            texts = [choice["message"]["content"] for choice in choices]
        except (ValueError, KeyError, TypeError) as exc:
            raise BackendUnavailable(f"malformed llm response: {exc}") from exc
        if len(texts) != request.n_samples:
            raise BackendUnavailable(
                f"llm backend returned {len(texts)} texts, expected {request.n_samples}")
        return texts


class LlmGateway:
    """Backend registry plus retry/timeout/accounting policy."""

    def __init__(self, counter: CallCounter | None = None, *,
                 timeout_s: float = DEFAULT_TIMEOUT_S,
                 max_parallel: int = DEFAULT_MAX_PARALLEL,
                 retry_sleeps: tuple[float, ...] = RETRY_SLEEPS_S,
                 sleep=time.sleep):
        if max_parallel <= 0:
            raise ValueError("max_parallel must be positive")
        self._counter = counter or CallCounter()
        self._timeout_s = timeout_s
        self._retry_sleeps = tuple(retry_sleeps)
        self._sleep = sleep
        self._slots = threading.BoundedSemaphore(max_parallel)
        self._backends: dict[str, object] = {}

    @property
    def counter(self) -> CallCounter:
        return self._counter

    def register(self, backend_id: str, backend) -> None:
        self._backends[backend_id] = backend

    def backend(self, backend_id: str):
        try:
            return self._backends[backend_id]
        except KeyError:
            raise UnknownBackend(f"no backend registered as {backend_id!r}") from None

    def complete(self, request: LlmRequest) -> LlmResponse:
        backend = self.backend(request.backend_id)
        # a retried call still counts once
        self._counter.increment(request.backend_id)
        start = time.perf_counter()
        with self._slots:
            texts = self._generate_with_retries(backend, request)
        if len(texts) != request.n_samples:
            raise BackendUnavailable(
                f"backend {request.backend_id!r} produced {len(texts)} texts, "
                f"expected {request.n_samples}")
        latency_ms = max(0, int((time.perf_counter() - start) * 1000))
        return LlmResponse(tuple(texts), request.backend_id, latency_ms, bool(getattr(backend, "is_mock", False)))

    def _generate_with_retries(self, backend, request: LlmRequest) -> list[str]:
        attempt = 0
        while True:
            try:
                return backend.generate(request, self._timeout_s)
            except BackendUnavailable as exc:
                if not exc.retryable or attempt >= len(self._retry_sleeps):
                    raise
                delay = self._retry_sleeps[attempt]
                log.warning("llm backend %s failed (attempt %d), retrying in %.2fs",
                            request.backend_id, attempt + 1, delay)
                self._sleep(delay)
                attempt += 1

    def call_counts(self) -> dict[str, int]:
        return self._counter.counts()

    def reset_call_counts(self) -> None:
        self._counter.reset()


class LlmClient:
    """Convenience handle binding a gateway to one backend id."""

    def __init__(self, gateway: LlmGateway, backend_id: str, max_tokens: int = 512):
        self.gateway = gateway
        self.backend_id = backend_id
        self.max_tokens = max_tokens

    def complete_text(self, prompt: str, *, temperature: float = 0.0, n: int = 1) -> list[str]:
        request = LlmRequest(prompt=prompt, temperature=temperature,
                             max_tokens=self.max_tokens, n_samples=n,
                             backend_id=self.backend_id)
        return list(self.gateway.complete(request).texts)
