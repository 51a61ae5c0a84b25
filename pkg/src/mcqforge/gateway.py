"""Provider-agnostic structured-completion gateway with record/replay.

Every agent talks to the language model through this module and nothing
else builds provider wire payloads. Three modes:

- ``live``:    call the configured chat-completions endpoint.
- ``record``:  live, plus append (fingerprint -> payload) to a transcript.
- ``replay``:  resolve calls from the transcript only; zero network.

A transcript makes a whole pipeline run a pure function of its inputs,
which is how the test suite stays deterministic and offline.

Fingerprints are sha256 over prompt_id, schema_id, model, and the rendered
prompt joined with a 0x1f separator. Temperature is deliberately excluded
so replay tolerates sampling tweaks; the model name is included because
outputs are model-specific.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Protocol

logger = logging.getLogger(__name__)

DEFAULT_MODEL = "gpt-4o-mini-2024-07-18"
API_KEY_ENV = "MCQFORGE_API_KEY"
API_KEY_FALLBACK_ENV = "OPENAI_API_KEY"

_TRANSPORT_RETRIES = 3
_BACKOFF_BASE_SECONDS = 0.5

_REPAIR_INSTRUCTION = (
    "Your previous reply was not valid structured output. "
    "Return only a valid JSON object matching the requested fields, "
    "with no prose and no code fences."
)


class GatewayError(Exception):
    """Base class for gateway failures."""


class ProviderUnreachableError(GatewayError):
    """Transport-level failure after all retries."""


class SchemaViolationError(GatewayError):
    """Model output never satisfied the expected schema."""

    def __init__(self, message: str, last_raw: str | None = None):
        super().__init__(message)
        self.last_raw = last_raw


class ReplayMissError(GatewayError):
    """Fingerprint absent from the replay transcript."""

    def __init__(self, prompt_id: str, fingerprint: str):
        super().__init__(f"replay miss for prompt {prompt_id!r} (fingerprint {fingerprint})")
        self.prompt_id = prompt_id
        self.fingerprint = fingerprint


@dataclass(frozen=True)
class CompletionRequest:
    """One structured-completion call: a rendered prompt plus the shape of
    output expected back (identified by schema_id)."""

    prompt_id: str
    rendered_prompt: str
    schema_id: str
    model: str = DEFAULT_MODEL
    temperature: float = 0.0
    max_attempts: int = 3

    def __post_init__(self) -> None:
        if not self.rendered_prompt:
            raise ValueError("rendered_prompt must be nonempty")
        if self.max_attempts < 1:
            raise ValueError("max_attempts must be >= 1")


@dataclass(frozen=True)
class CompletionResult:
    payload: dict
    attempts: int
    fingerprint: str
    from_replay: bool


def fingerprint(req: CompletionRequest) -> str:
    """Stable request hash; see module docstring for what it covers."""
    blob = "\x1f".join([req.prompt_id, req.schema_id, req.model, req.rendered_prompt])
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


# ---------------------------------------------------------------------------
# Schema registry

SchemaValidator = Callable[[dict], list[str]]

_SCHEMAS: dict[str, SchemaValidator] = {}


def register_schema(schema_id: str, validator: SchemaValidator) -> None:
    _SCHEMAS[schema_id] = validator


def validate_payload(schema_id: str, payload: object) -> list[str]:
    """Returns a list of problems; empty when the payload fits the schema."""
    if not isinstance(payload, dict):
        return [f"expected a JSON object, got {type(payload).__name__}"]
    try:
        validator = _SCHEMAS[schema_id]
    except KeyError:
        raise GatewayError(f"unknown schema_id {schema_id!r}") from None
    return validator(payload)


# ---------------------------------------------------------------------------
# Transcript

@dataclass
class Transcript:
    """Ordered (fingerprint -> payload) pairs; lookup is exact-match."""

    entries: dict[str, dict] = field(default_factory=dict)
    prompt_ids: dict[str, str] = field(default_factory=dict)

    @classmethod
    def load(cls, path: str | Path) -> "Transcript":
        transcript = cls()
        with open(path, encoding="utf-8") as fh:
            for line_no, line in enumerate(fh, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    record = json.loads(line)
                    fp = record["fingerprint"]
                    payload = record["response"]
                except (json.JSONDecodeError, KeyError) as exc:
                    raise GatewayError(f"{path}:{line_no}: bad transcript record ({exc})") from exc
                if fp in transcript.entries:
                    raise GatewayError(f"{path}:{line_no}: duplicate fingerprint {fp}")
                transcript.entries[fp] = payload
                transcript.prompt_ids[fp] = record.get("prompt_id", "?")
        return transcript

    def save(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for fp, payload in self.entries.items():
                fh.write(self._record_line(fp, payload))

    def add(self, fp: str, prompt_id: str, payload: dict) -> None:
        self.entries[fp] = payload
        self.prompt_ids[fp] = prompt_id

    def _record_line(self, fp: str, payload: dict) -> str:
        record = {"fingerprint": fp, "prompt_id": self.prompt_ids.get(fp, "?"), "response": payload}
        return json.dumps(record, ensure_ascii=False, separators=(",", ":")) + "\n"

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, fp: str) -> bool:
        return fp in self.entries


# ---------------------------------------------------------------------------
# Providers

class Provider(Protocol):
    def complete(self, req: CompletionRequest, prompt_override: str | None = None) -> str:
        """Return raw model text for the (possibly repaired) prompt."""
        ...


class HttpProvider:
    """OpenAI-compatible chat-completions client.

    The API key comes only from the environment (MCQFORGE_API_KEY, falling
    back to OPENAI_API_KEY), never from files on disk. The base URL is
    configurable so self-hosted compatible servers work unchanged.
    """

    def __init__(self, base_url: str = "https://api.openai.com/v1", timeout: float = 60.0):
        self.base_url = base_url.rstrip("/")
        self.timeout = timeout

    def _api_key(self) -> str:
        key = os.environ.get(API_KEY_ENV) or os.environ.get(API_KEY_FALLBACK_ENV)
        if not key:
            raise ProviderUnreachableError(
                f"no API key: set {API_KEY_ENV} (or {API_KEY_FALLBACK_ENV}) in the environment"
            )
        return key

    def complete(self, req: CompletionRequest, prompt_override: str | None = None) -> str:
        import httpx

        body = {
            "model": req.model,
            "messages": [{"role": "user", "content": prompt_override or req.rendered_prompt}],
            "temperature": req.temperature,
            "response_format": {"type": "json_object"},
        }
        last_exc: Exception | None = None
        for attempt in range(_TRANSPORT_RETRIES):
            try:
                response = httpx.post(
                    f"{self.base_url}/chat/completions",
                    json=body,
                    headers={"Authorization": f"Bearer {self._api_key()}"},
                    timeout=self.timeout,
                )
                response.raise_for_status()
                return response.json()["choices"][0]["message"]["content"]
            except httpx.HTTPError as exc:
                last_exc = exc
                if attempt < _TRANSPORT_RETRIES - 1:
                    time.sleep(_BACKOFF_BASE_SECONDS * 2**attempt)
        raise ProviderUnreachableError(f"provider unreachable after {_TRANSPORT_RETRIES} tries: {last_exc}")


# ---------------------------------------------------------------------------
# Gateway

class Gateway:
    """Structured-completion front end; safe for concurrent callers.

    In live/record mode, malformed outputs trigger a repair re-prompt (the
    original prompt plus a "return only valid structured output" line) up
    to ``req.max_attempts`` total provider calls. Record mode stores the
    final valid payload under the original request fingerprint, so replay
    never needs the repair exchange.
    """

    def __init__(
        self,
        mode: str = "replay",
        transcript: Transcript | None = None,
        transcript_path: str | Path | None = None,
        provider: Provider | None = None,
    ):
        if mode not in ("live", "record", "replay"):
            raise ValueError(f"unknown gateway mode {mode!r}")
        if mode == "replay" and transcript is None and transcript_path is None:
            raise ValueError("replay mode requires a transcript")
        self.mode = mode
        self.transcript = transcript if transcript is not None else (
            Transcript.load(transcript_path) if mode == "replay" else Transcript()
        )
        self._transcript_path = Path(transcript_path) if transcript_path else None
        if mode == "record" and transcript is None and transcript_path and self._transcript_path.exists():
            self.transcript = Transcript.load(transcript_path)
        self.provider = provider if provider is not None else (HttpProvider() if mode != "replay" else None)
        self._lock = threading.Lock()
        self.calls_by_prompt_id: dict[str, int] = {}
        self.replay_hits_by_prompt_id: dict[str, int] = {}
        self.total_calls = 0

    def complete_structured(
        self,
        req: CompletionRequest,
        extra_validator: SchemaValidator | None = None,
    ) -> CompletionResult:
        """Resolve one structured completion; see class docstring.

        ``extra_validator`` lets a caller add semantic checks (beyond the
        schema) that should also count toward the repair budget.
        """
        fp = fingerprint(req)
        with self._lock:
            self.calls_by_prompt_id[req.prompt_id] = self.calls_by_prompt_id.get(req.prompt_id, 0) + 1
            self.total_calls += 1

        if self.mode == "replay":
            return self._replay(req, fp, extra_validator)
        return self._live(req, fp, extra_validator)

    def _validate(self, req: CompletionRequest, payload: object, extra: SchemaValidator | None) -> list[str]:
        problems = validate_payload(req.schema_id, payload)
        if not problems and extra is not None:
            problems = extra(payload)  # type: ignore[arg-type]
        return problems

    def _replay(self, req: CompletionRequest, fp: str, extra: SchemaValidator | None) -> CompletionResult:
        if fp not in self.transcript:
            raise ReplayMissError(req.prompt_id, fp)
        payload = self.transcript.entries[fp]
        problems = self._validate(req, payload, extra)
        if problems:
            raise SchemaViolationError(
                f"stored payload for {req.prompt_id} violates schema {req.schema_id}: {problems}"
            )
        with self._lock:
            self.replay_hits_by_prompt_id[req.prompt_id] = self.replay_hits_by_prompt_id.get(req.prompt_id, 0) + 1
        return CompletionResult(payload=payload, attempts=1, fingerprint=fp, from_replay=True)

    def _live(self, req: CompletionRequest, fp: str, extra: SchemaValidator | None) -> CompletionResult:
        assert self.provider is not None
        prompt = req.rendered_prompt
        last_raw: str | None = None
        for attempt in range(1, req.max_attempts + 1):
            raw = self.provider.complete(req, prompt_override=prompt if attempt > 1 else None)
            last_raw = raw
            try:
                payload = json.loads(raw)
                problems = self._validate(req, payload, extra)
            except json.JSONDecodeError as exc:
                problems = [f"not valid JSON: {exc}"]
                payload = None
            if not problems:
                assert isinstance(payload, dict)
                if self.mode == "record":
                    self._record(fp, req.prompt_id, payload)
                return CompletionResult(payload=payload, attempts=attempt, fingerprint=fp, from_replay=False)
            logger.warning("attempt %d for %s rejected: %s", attempt, req.prompt_id, problems)
            prompt = f"{req.rendered_prompt}\n\n{_REPAIR_INSTRUCTION}\nProblems with the previous reply: {problems}"
        raise SchemaViolationError(
            f"{req.prompt_id}: output failed schema {req.schema_id} after {req.max_attempts} attempts",
            last_raw=last_raw,
        )

    def _record(self, fp: str, prompt_id: str, payload: dict) -> None:
        with self._lock:
            if fp in self.transcript:
                return
            self.transcript.add(fp, prompt_id, payload)
            if self._transcript_path is not None:
                with open(self._transcript_path, "a", encoding="utf-8") as fh:
                    fh.write(self.transcript._record_line(fp, payload))
                    fh.flush()

    def stats(self) -> dict:
        with self._lock:
            return {
                "total_calls": self.total_calls,
                "calls_by_prompt_id": dict(self.calls_by_prompt_id),
                "replay_hits_by_prompt_id": dict(self.replay_hits_by_prompt_id),
            }
