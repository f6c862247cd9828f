"""Chat-completion backends: live HTTP, record/replay traces, and scripted stubs.

The replay backend keys each request by a content hash of its canonical
form, so a pipeline run against a complete trace store is a pure function
of its inputs and seeds -- no network, byte-identical responses.
"""

from __future__ import annotations

import hashlib
import json
import os
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Optional, Protocol

import requests

API_KEY_ENV = "RAARG_API_KEY"
API_BASE_ENV = "RAARG_API_BASE"

DEFAULT_TOKEN_RATIO = 4


class GatewayError(Exception):
    """Base class for backend failures."""


class BackendUnavailable(GatewayError):
    """The HTTP backend could not be reached or kept failing."""


class RateLimited(GatewayError):
    """The HTTP backend returned 429 on every attempt."""


class ReplayMiss(GatewayError):
    """No recorded trace exists for the request key and recording is off."""

    def __init__(self, key: str):
        super().__init__(f"no recorded response for request key {key}")
        self.key = key


@dataclass(frozen=True)
class ChatRequest:
    user_text: str
    system_text: Optional[str] = None
    temperature: float = 0.0
    max_output_tokens: int = 1024
    tag: str = ""

    def __post_init__(self):
        if not self.user_text:
            raise ValueError("user_text must be non-empty")
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")
        if self.max_output_tokens <= 0:
            raise ValueError("max_output_tokens must be positive")


@dataclass(frozen=True)
class ChatResponse:
    text: str
    backend_id: str
    input_tokens: Optional[int] = None
    output_tokens: Optional[int] = None


@dataclass
class BackendConfig:
    """Declarative backend selection, persisted into run manifests."""

    kind: str = "replay"  # "http_chat" | "replay"
    endpoint: Optional[str] = None
    model: str = "gpt-4o-mini"
    trace_dir: Optional[str] = None
    record: bool = False
    retry_limit: int = 2
    request_timeout: float = 60.0
    max_in_flight: int = 4
    token_ratio: int = DEFAULT_TOKEN_RATIO

    def __post_init__(self):
        if self.kind not in ("http_chat", "replay"):
            raise ValueError(f"unknown backend kind: {self.kind!r}")
        if self.retry_limit < 0:
            raise ValueError("retry_limit must be >= 0")


class Backend(Protocol):
    backend_id: str

    def complete(self, request: ChatRequest) -> ChatResponse: ...


def canonical_request_payload(request: ChatRequest) -> dict:
    """The fields that identify a request for replay purposes.

    The tag is deliberately excluded: it is tracing metadata, not content.
    """
    return {
        "system_text": request.system_text,
        "user_text": request.user_text,
        "temperature": float(request.temperature),
        "max_output_tokens": int(request.max_output_tokens),
    }


def request_key(request: ChatRequest) -> str:
    """Stable content hash of the canonical request form.

    Keys are insensitive to field ordering because the canonical JSON is
    serialized with sorted keys.
    """
    blob = json.dumps(
        canonical_request_payload(request),
        sort_keys=True,
        ensure_ascii=True,
        separators=(",", ":"),
    )
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def estimate_tokens(text: str, ratio: int = DEFAULT_TOKEN_RATIO) -> int:
    """Byte-ratio token estimate: ceil(byte_length / ratio).

    A heuristic, not a tokenizer; budgeting only needs proportional sizes.
    Monotone in byte length for a fixed ratio.
    """
    if ratio <= 0:
        raise ValueError("ratio must be positive")
    n = len(text.encode("utf-8"))
    return -(-n // ratio)


class HttpChatBackend:
    """OpenAI-compatible chat-completions client with retry/backoff."""

    def __init__(
        self,
        endpoint: Optional[str] = None,
        api_key: Optional[str] = None,
        model: str = "gpt-4o-mini",
        retry_limit: int = 2,
        request_timeout: float = 60.0,
        backoff_base: float = 0.5,
        session: Optional[requests.Session] = None,
    ):
        self.endpoint = (endpoint or os.environ.get(API_BASE_ENV, "")).rstrip("/")
        if not self.endpoint:
            raise BackendUnavailable(
                f"no endpoint configured; set {API_BASE_ENV} or pass endpoint="
            )
        self.api_key = api_key if api_key is not None else os.environ.get(API_KEY_ENV, "")
        self.model = model
        self.retry_limit = retry_limit
        self.request_timeout = request_timeout
        self.backoff_base = backoff_base
        self.backend_id = f"http_chat:{model}"
        self._session = session or requests.Session()

    def complete(self, request: ChatRequest) -> ChatResponse:
        messages = []
        if request.system_text:
            messages.append({"role": "system", "content": request.system_text})
        messages.append({"role": "user", "content": request.user_text})
        payload = {
            "model": self.model,
            "messages": messages,
            "temperature": request.temperature,
            "max_tokens": request.max_output_tokens,
        }
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"

        url = f"{self.endpoint}/chat/completions"
        last_error: Optional[Exception] = None
        rate_limited = False
        for attempt in range(self.retry_limit + 1):
            if attempt:
                time.sleep(self.backoff_base * (2 ** (attempt - 1)))
            try:
                resp = self._session.post(
                    url, json=payload, headers=headers, timeout=self.request_timeout
                )
            except requests.RequestException as exc:
                last_error = exc
                continue
            if resp.status_code == 429:
                rate_limited = True
                last_error = BackendUnavailable(f"429 from {url}")
                continue
            if resp.status_code >= 500:
                last_error = BackendUnavailable(f"{resp.status_code} from {url}")
                continue
            if resp.status_code != 200:
                raise BackendUnavailable(
                    f"{resp.status_code} from {url}: {resp.text[:200]}"
                )
            body = resp.json()
            text = body["choices"][0]["message"]["content"] or ""
            usage = body.get("usage") or {}
            return ChatResponse(
                text=text,
                backend_id=self.backend_id,
                input_tokens=usage.get("prompt_tokens"),
                output_tokens=usage.get("completion_tokens"),
            )
        if rate_limited:
            raise RateLimited(f"rate limited after {self.retry_limit + 1} attempts")
        raise BackendUnavailable(
            f"backend unavailable after {self.retry_limit + 1} attempts: {last_error}"
        )


class ScriptedBackend:
    """Deterministic in-process backend driven by a reply function.

    Used to record trace stores for tests and demos; never configured from
    a run config.
    """

    def __init__(self, reply_fn: Callable[[ChatRequest], str], backend_id: str = "scripted"):
        self._reply_fn = reply_fn
        self.backend_id = backend_id

    def complete(self, request: ChatRequest) -> ChatResponse:
        return ChatResponse(text=self._reply_fn(request), backend_id=self.backend_id)


class ReplayBackend:
    """Content-addressed record/replay store over any inner backend.

    Each trace is one JSON file named by the request key, holding the
    canonical request and the response text. Replay returns the recorded
    text byte-for-byte; a miss with recording disabled raises ReplayMiss.
    """

    def __init__(self, trace_dir: str | Path, record_with: Optional[Backend] = None):
        self.trace_dir = Path(trace_dir)
        self.record_with = record_with
        self.backend_id = "replay"
        self._write_lock = threading.Lock()
        if record_with is not None:
            self.trace_dir.mkdir(parents=True, exist_ok=True)

    def _trace_path(self, key: str) -> Path:
        return self.trace_dir / f"{key}.json"

    def has(self, request: ChatRequest) -> bool:
        return self._trace_path(request_key(request)).exists()

    def complete(self, request: ChatRequest) -> ChatResponse:
        key = request_key(request)
        path = self._trace_path(key)
        if path.exists():
            record = json.loads(path.read_text(encoding="utf-8"))
            return ChatResponse(text=record["response"]["text"], backend_id=self.backend_id)
        if self.record_with is None:
            raise ReplayMiss(key)
        response = self.record_with.complete(request)
        record = {
            "key": key,
            "request": canonical_request_payload(request),
            "tag": request.tag,
            "response": {"text": response.text},
        }
        blob = json.dumps(record, sort_keys=True, ensure_ascii=True, indent=1)
        with self._write_lock:
            tmp = path.with_suffix(".tmp")
            tmp.write_text(blob, encoding="utf-8")
            tmp.replace(path)
        return response


def make_backend(config: BackendConfig) -> Backend:
    """Instantiate the backend a config describes."""
    if config.kind == "http_chat":
        return HttpChatBackend(
            endpoint=config.endpoint,
            model=config.model,
            retry_limit=config.retry_limit,
            request_timeout=config.request_timeout,
        )
    if config.trace_dir is None:
        raise ValueError("replay backend requires trace_dir")
    record_with = None
    if config.record:
        record_with = HttpChatBackend(
            endpoint=config.endpoint,
            model=config.model,
            retry_limit=config.retry_limit,
            request_timeout=config.request_timeout,
        )
    return ReplayBackend(config.trace_dir, record_with=record_with)


def complete_many(
    backend: Backend,
    requests_: Iterable[ChatRequest],
    max_in_flight: int = 4,
) -> list[ChatResponse]:
    """Complete several requests with bounded parallelism, preserving order."""
    items = list(requests_)
    if max_in_flight <= 1 or len(items) <= 1:
        return [backend.complete(r) for r in items]
    with ThreadPoolExecutor(max_workers=max_in_flight) as pool:
        return list(pool.map(backend.complete, items))
