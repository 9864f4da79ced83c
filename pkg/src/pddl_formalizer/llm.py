"""Text-generation backends: an OpenAI-style chat-completion client and a scripted mock."""

from __future__ import annotations

import json
import logging
import os
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Union

import httpx
import yaml

log = logging.getLogger(__name__)

DEFAULT_TEMPERATURE = 0.4
DEFAULT_MAX_TOKENS = 8192
ROLES = ("system", "user", "assistant")

ENV_API_BASE = "FORMALIZER_API_BASE"
ENV_API_KEY = "FORMALIZER_API_KEY"


@dataclass(frozen=True)
class Message:
    role: str
    content: str

    def __post_init__(self) -> None:
        if self.role not in ROLES:
            raise ValueError(f"unknown role {self.role!r}")


@dataclass(frozen=True)
class ScriptKey:
    """Routes a request to a mock script entry. Never sent over the wire."""

    problem_id: str
    stage: str
    attempt: int


@dataclass(frozen=True)
class GenerationRequest:
    messages: tuple[Message, ...]
    temperature: float = DEFAULT_TEMPERATURE
    max_tokens: int = DEFAULT_MAX_TOKENS
    seed: int | None = None
    key: ScriptKey | None = None

    def __post_init__(self) -> None:
        if self.temperature < 0:
            raise ValueError("temperature must be non-negative")
        if self.max_tokens < 1:
            raise ValueError("max_tokens must be positive")

    def payload(self, model: str) -> dict:
        body = {
            "model": model,
            "messages": [{"role": m.role, "content": m.content} for m in self.messages],
            "temperature": self.temperature,
            "max_tokens": self.max_tokens,
        }
        if self.seed is not None:
            body["seed"] = self.seed
        return body


@dataclass(frozen=True)
class GenerationResponse:
    content: str | None
    finish_reason: str  # stop | length | error
    latency: float = 0.0
    error: str = ""

    def __post_init__(self) -> None:
        if (self.content is None) != (self.finish_reason == "error"):
            raise ValueError("content must be present exactly when finish_reason is not 'error'")

    @property
    def ok(self) -> bool:
        return self.finish_reason != "error"


class MockFixtureError(LookupError):
    """A mock script has no entry for a request; the run must stop."""


# ---------------------------------------------------------------------------
# mock backend

ScriptEntry = Union[str, Callable[[GenerationRequest], str]]


class MockScript:
    """Canned responses keyed by (problem id, pipeline stage, attempt index).

    Entries are text, or (in Python fixtures) callables receiving the request.
    """

    def __init__(self, entries: dict[tuple[str, str, int], ScriptEntry] | None = None):
        self.entries: dict[ScriptKey, ScriptEntry] = {}
        for key, value in (entries or {}).items():
            self.add(*key, value)

    def add(self, problem_id: str, stage: str, attempt: int, response: ScriptEntry) -> None:
        self.entries[ScriptKey(problem_id, stage, attempt)] = response

    def lookup(self, request: GenerationRequest) -> str:
        if request.key is None:
            raise MockFixtureError("request carries no script key")
        entry = self.entries.get(request.key)
        if entry is None:
            k = request.key
            raise MockFixtureError(f"mock script has no entry for ({k.problem_id}, {k.stage}, {k.attempt})")
        return entry(request) if callable(entry) else entry

    def to_json(self) -> str:
        rows = []
        for key in sorted(self.entries, key=lambda k: (k.problem_id, k.stage, k.attempt)):
            value = self.entries[key]
            if callable(value):
                raise TypeError("callable entries cannot be serialized")
            rows.append({"problem_id": key.problem_id, "stage": key.stage, "attempt": key.attempt, "response": value})
        return json.dumps({"entries": rows}, indent=1, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "MockScript":
        script = cls()
        for row in json.loads(text)["entries"]:
            script.add(row["problem_id"], row["stage"], int(row["attempt"]), row["response"])
        return script

    @classmethod
    def load(cls, path: Path | str) -> "MockScript":
        return cls.from_json(Path(path).read_text(encoding="utf-8"))


class MockBackend:
    name = "mock"

    def __init__(self, script: MockScript):
        self.script = script
        self.requests: list[GenerationRequest] = []
        self._lock = threading.Lock()

    @property
    def calls(self) -> int:
        return len(self.requests)

    def generate(self, request: GenerationRequest) -> GenerationResponse:
        with self._lock:
            self.requests.append(request)
        return GenerationResponse(self.script.lookup(request), "stop")


# ---------------------------------------------------------------------------
# remote backend


@dataclass
class BackendConfig:
    name: str = "remote"
    kind: str = "remote"  # remote | mock
    model: str = ""
    base_url: str = "http://localhost:8000/v1"
    api_key: str = ""
    max_inflight: int = 4
    retries: int = 3
    backoff: float = 1.0
    request_timeout: float = 600.0
    mock_script: str | None = None
    extra: dict = field(default_factory=dict)

    @classmethod
    def load(cls, path: Path | str | None, name: str) -> "BackendConfig":
        """Read backend ``name`` from a YAML file (``backends: {name: {...}}``), then apply env overrides."""
        values: dict = {}
        if path is not None:
            data = yaml.safe_load(Path(path).read_text(encoding="utf-8")) or {}
            backends = data.get("backends", {})
            if name not in backends:
                raise KeyError(f"backend {name!r} not found in {path}")
            values = dict(backends[name] or {})
        elif name not in ("mock", "remote"):
            raise KeyError(f"backend {name!r} needs a backend config file")
        values.setdefault("kind", "mock" if name == "mock" else "remote")
        known = {f for f in cls.__dataclass_fields__ if f not in ("name", "extra")}
        config = cls(name=name, **{k: v for k, v in values.items() if k in known})
        config.extra = {k: v for k, v in values.items() if k not in known}
        config.base_url = os.environ.get(ENV_API_BASE, config.base_url)
        config.api_key = os.environ.get(ENV_API_KEY, config.api_key)
        return config


class BackendError(RuntimeError):
    pass


_RETRYABLE_STATUS = {408, 409, 425, 429, 500, 502, 503, 504}


class RemoteBackend:
    """Chat-completion client with bounded concurrency and exponential backoff."""

    def __init__(
        self,
        config: BackendConfig,
        client: httpx.Client | None = None,
        sleep: Callable[[float], None] = time.sleep,
    ):
        self.config = config
        self.name = config.name
        self.client = client or httpx.Client(timeout=config.request_timeout)
        self._sleep = sleep
        self._slots = threading.BoundedSemaphore(max(1, config.max_inflight))

    def _post(self, payload: dict) -> dict:
        headers = {"Content-Type": "application/json"}
        if self.config.api_key:
            headers["Authorization"] = f"Bearer {self.config.api_key}"
        url = self.config.base_url.rstrip("/") + "/chat/completions"
        last_error = ""
        for attempt in range(self.config.retries + 1):
            if attempt:
                self._sleep(self.config.backoff * 2 ** (attempt - 1))
            try:
                resp = self.client.post(url, json=payload, headers=headers)
            except httpx.TransportError as exc:
                last_error = f"transport error: {exc}"
                log.warning("generate attempt %d failed: %s", attempt + 1, last_error)
                continue
            if resp.status_code in _RETRYABLE_STATUS:
                last_error = f"HTTP {resp.status_code}"
                log.warning("generate attempt %d failed: %s", attempt + 1, last_error)
                continue
            if resp.status_code >= 400:
                raise BackendError(f"HTTP {resp.status_code}: {resp.text[:200]}")
            try:
                return resp.json()
            except ValueError as exc:
                raise BackendError(f"response is not JSON: {exc}") from exc
        raise BackendError(f"gave up after {self.config.retries + 1} attempts ({last_error})")

    def generate(self, request: GenerationRequest) -> GenerationResponse:
        started = time.monotonic()
        with self._slots:
            try:
                data = self._post(request.payload(self.config.model))
                choice = data["choices"][0]
                content = choice["message"]["content"]
                if not isinstance(content, str):
                    raise BackendError("response has no text content")
            except (BackendError, KeyError, IndexError, TypeError) as exc:
                return GenerationResponse(None, "error", time.monotonic() - started, str(exc))
        reason = "length" if choice.get("finish_reason") == "length" else "stop"
        return GenerationResponse(content, reason, time.monotonic() - started)


Backend = Union[MockBackend, RemoteBackend]


def make_backend(config: BackendConfig, script: MockScript | None = None) -> Backend:
    if config.kind == "mock":
        if script is None:
            if not config.mock_script:
                raise ValueError("the mock backend needs a script")
            script = MockScript.load(config.mock_script)
        return MockBackend(script)
    if config.kind == "remote":
        if not config.model:
            raise ValueError(f"backend {config.name!r} has no model name")
        return RemoteBackend(config)
    raise ValueError(f"unknown backend kind {config.kind!r}")


def generate(backend: Backend, request: GenerationRequest) -> GenerationResponse:
    return backend.generate(request)
