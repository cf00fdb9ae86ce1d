"""Client for OpenAI-compatible chat-completion endpoints.

Builds the polarity conversation for the requested run mode, sends it,
and parses the completion.  Three modes:

  thinking:     assistant primed with "<think>" so the model reasons first
  non_thinking: assistant primed with an empty think block (ablation)
  zero_shot:    no assistant prefix at all (unadapted-model condition)

Parse failures are outcomes, not crashes; they score as incorrect
downstream, which is exactly how off-format generations should count.
"""
from __future__ import annotations

import json
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import httpx

from .labels import LabelParseError
from .prompts import INSTRUCTION
from .thinkparse import ClassificationOutcome, parse_completion

__all__ = [
    "ENV_ENDPOINT",
    "ENV_API_KEY",
    "EndpointConfig",
    "RunMode",
    "TransportError",
    "EndpointError",
    "FailedOutcome",
    "TranscriptWriter",
    "build_request_messages",
    "classify",
    "classify_batch",
    "health_check",
]

ENV_ENDPOINT = "POLARITY_ENDPOINT"
ENV_API_KEY = "POLARITY_API_KEY"

THINKING_PREFIX = "<think>"
NON_THINKING_PREFIX = "<think>\n\n</think>\n"


class RunMode(str, Enum):
    THINKING = "thinking"
    NON_THINKING = "non_thinking"
    ZERO_SHOT = "zero_shot"


@dataclass(frozen=True)
class EndpointConfig:
    base_url: str
    model_name: str
    api_key: str | None = None
    temperature: float = 0.0  # greedy by default; accuracy runs want determinism
    max_new_tokens: int = 256
    request_timeout: float = 60.0
    max_retries: int = 2
    retry_backoff: float = 0.5
    max_in_flight: int = 4
    # endpoints without continue-from-assistant semantics can have the
    # prefix appended to the user message instead
    prefix_mode: str = "assistant"

    def __post_init__(self):
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")
        if self.max_in_flight < 1:
            raise ValueError("max_in_flight must be >= 1")
        if self.prefix_mode not in ("assistant", "user_append"):
            raise ValueError(f"unknown prefix_mode {self.prefix_mode!r}")


class TransportError(Exception):
    pass


class EndpointError(Exception):
    def __init__(self, status: int | None, detail: str):
        super().__init__(f"endpoint error (status {status}): {detail}")
        self.status = status
        self.detail = detail


@dataclass
class FailedOutcome:
    """A per-item failure slot: scores as incorrect, never aborts a run."""

    kind: str  # "parse" | "transport" | "endpoint"
    detail: str
    raw: str | None = None
    meta: dict = field(default_factory=dict)


class TranscriptWriter:
    """Append-only JSONL log of every request/response pair, for replay."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self._lock = threading.Lock()

    def write(self, event: str, payload: dict) -> None:
        line = json.dumps({"ts": time.time(), "event": event, **payload}, ensure_ascii=False)
        with self._lock:
            with self.path.open("a", encoding="utf-8") as f:
                f.write(line + "\n")


def build_request_messages(text: str, mode: RunMode, prefix_mode: str = "assistant") -> list[dict]:
    """The outgoing message list for one classification request."""
    prefix = {RunMode.THINKING: THINKING_PREFIX, RunMode.NON_THINKING: NON_THINKING_PREFIX}.get(mode)
    user_content = INSTRUCTION + text
    if prefix is None:
        return [{"role": "user", "content": user_content}]
    if prefix_mode == "user_append":
        return [{"role": "user", "content": user_content + prefix}]
    return [{"role": "user", "content": user_content}, {"role": "assistant", "content": prefix}]


def _chat_url(cfg: EndpointConfig) -> str:
    return cfg.base_url.rstrip("/") + "/v1/chat/completions"


def _headers(cfg: EndpointConfig) -> dict:
    headers = {"Content-Type": "application/json"}
    if cfg.api_key:
        headers["Authorization"] = f"Bearer {cfg.api_key}"
    return headers


def _post_chat(client: httpx.Client, cfg: EndpointConfig, messages: list[dict],
               transcript: TranscriptWriter | None) -> dict:
    """POST with retries on transport failures and 5xx only."""
    body = {
        "model": cfg.model_name,
        "messages": messages,
        "temperature": cfg.temperature,
        "max_tokens": cfg.max_new_tokens,
    }
    if transcript:
        transcript.write("request", {"url": _chat_url(cfg), "body": body})
    last_error: Exception | None = None
    for attempt in range(cfg.max_retries + 1):
        try:
            resp = client.post(_chat_url(cfg), json=body, headers=_headers(cfg), timeout=cfg.request_timeout)
        except httpx.HTTPError as exc:
            last_error = TransportError(f"request failed: {exc}")
        else:
            if resp.status_code >= 500:
                last_error = EndpointError(resp.status_code, resp.text[:500])
            elif resp.status_code >= 400:
                if transcript:
                    transcript.write("error", {"status": resp.status_code, "body": resp.text[:2000]})
                raise EndpointError(resp.status_code, resp.text[:500])
            else:
                try:
                    data = resp.json()
                except ValueError as exc:
                    if transcript:
                        transcript.write("error", {"status": resp.status_code, "detail": "unparseable body"})
                    raise EndpointError(resp.status_code, f"malformed response body: {exc}")
                if transcript:
                    transcript.write("response", {"status": resp.status_code, "body": data})
                return data
        if attempt < cfg.max_retries and cfg.retry_backoff > 0:
            time.sleep(cfg.retry_backoff * (2 ** attempt))
    if transcript:
        transcript.write("error", {"detail": str(last_error)})
    raise last_error


def _completion_content(data: dict) -> str:
    try:
        content = data["choices"][0]["message"]["content"]
    except (KeyError, IndexError, TypeError):
        raise EndpointError(None, f"response missing choices[0].message.content: {json.dumps(data)[:300]}")
    if not isinstance(content, str):
        raise EndpointError(None, "completion content is not a string")
    return content


def classify(text: str, cfg: EndpointConfig, mode: RunMode = RunMode.THINKING,
             transcript: TranscriptWriter | None = None,
             _client: httpx.Client | None = None) -> ClassificationOutcome | FailedOutcome:
    """Classify one text; raises on transport/endpoint failure, returns a
    FailedOutcome on an unparseable completion."""
    messages = build_request_messages(text, mode, cfg.prefix_mode)
    client = _client or httpx.Client()
    started = time.monotonic()
    try:
        data = _post_chat(client, cfg, messages, transcript)
    finally:
        if _client is None:
            client.close()
    latency = time.monotonic() - started
    completion = _completion_content(data)
    meta = {"latency_s": latency, "mode": mode.value}
    if cfg.prefix_mode == "user_append":
        meta["prefix_fallback"] = True
    if isinstance(data.get("usage"), dict):
        meta["usage"] = data["usage"]
    try:
        outcome = parse_completion(completion)
    except LabelParseError as exc:
        return FailedOutcome(kind="parse", detail=str(exc), raw=completion, meta=meta)
    outcome.meta.update(meta)
    return outcome


def classify_batch(texts: list[str], cfg: EndpointConfig, mode: RunMode = RunMode.THINKING,
                   transcript: TranscriptWriter | None = None) -> list[ClassificationOutcome | FailedOutcome]:
    """Classify many texts with at most max_in_flight outstanding requests.

    Outcomes come back in input order; per-item transport/endpoint
    failures become FailedOutcome entries at the failing index.
    """
    if not texts:
        raise ValueError("classify_batch needs a non-empty list of texts")

    def worker(client_and_text):
        client, text = client_and_text
        try:
            return classify(text, cfg, mode, transcript, _client=client)
        except TransportError as exc:
            return FailedOutcome(kind="transport", detail=str(exc))
        except EndpointError as exc:
            return FailedOutcome(kind="endpoint", detail=exc.detail, meta={"status": exc.status})

    with httpx.Client() as client:
        with ThreadPoolExecutor(max_workers=cfg.max_in_flight) as pool:
            return list(pool.map(worker, ((client, t) for t in texts)))


def health_check(cfg: EndpointConfig) -> str:
    """One lightweight request; returns "ok", "unreachable", or "auth_failed"."""
    url = cfg.base_url.rstrip("/") + "/v1/models"
    try:
        resp = httpx.get(url, headers=_headers(cfg), timeout=min(cfg.request_timeout, 10.0))
    except Exception:
        return "unreachable"
    if resp.status_code in (401, 403):
        return "auth_failed"
    return "ok"
