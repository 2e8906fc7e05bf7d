"""Single gateway through which every model call flows.

Backends:
  - ScriptedBackend: deterministic responses loaded from a JSONL fixture file,
    keyed by (template_id, fixture_key). Doubles as the replay backend for
    recordings made with Recorder.
  - Recorder: wraps any backend and appends each response to a JSONL file in
    the same fixture format, so a run recorded once replays bit-identically.
  - RemoteBackend: minimal JSON-over-HTTP client mirroring the request and
    response shapes. Optional; nothing in the pipeline requires it.

Fixture file format (one JSON object per line):
  {"template_id": ..., "fixture_key": ..., "text": ..., "token_probs": [...],
   "latency_ms": ...}
"""

from __future__ import annotations

import json
import logging
import threading
import urllib.request
from dataclasses import dataclass, field
from pathlib import Path

from .errors import (
    BackendTimeout,
    DuplicateTemplate,
    MissingSlot,
    UnknownFixture,
    UnknownTemplate,
)
from .timing import TimeBudget

logger = logging.getLogger(__name__)

FIXTURE_KEY_SLOT = "fixture_key"


@dataclass(frozen=True)
class PromptTemplate:
    template_id: str
    body: str
    required_slots: frozenset[str]
    requires_image: bool = False

    def render(self, slots: dict[str, str]) -> str:
        missing = self.required_slots - slots.keys()
        if missing:
            raise MissingSlot(
                f"template {self.template_id!r} missing slots: {sorted(missing)}"
            )
        out = self.body
        for name, value in slots.items():
            out = out.replace("{" + name + "}", str(value))
        return out


@dataclass(frozen=True)
class ModelRequest:
    template_id: str
    slots: dict[str, str]
    image_ref: str | None = None
    max_tokens: int = 512

    def __post_init__(self):
        if self.max_tokens < 1:
            raise ValueError("max_tokens must be positive")


@dataclass(frozen=True)
class ModelResponse:
    text: str
    token_probs: tuple[float, ...]
    latency: float  # seconds

    def __post_init__(self):
        for p in self.token_probs:
            if not (0.0 < p <= 1.0):
                raise ValueError(f"token probability {p} outside (0, 1]")


@dataclass(frozen=True)
class FixtureEntry:
    template_id: str
    fixture_key: str
    text: str
    token_probs: tuple[float, ...]
    latency_ms: float = 0.0

    @classmethod
    def from_dict(cls, raw: dict) -> "FixtureEntry":
        return cls(
            template_id=raw["template_id"],
            fixture_key=raw["fixture_key"],
            text=raw["text"],
            token_probs=tuple(float(p) for p in raw["token_probs"]),
            latency_ms=float(raw.get("latency_ms", 0.0)),
        )

    def to_dict(self) -> dict:
        return {
            "template_id": self.template_id,
            "fixture_key": self.fixture_key,
            "text": self.text,
            "token_probs": list(self.token_probs),
            "latency_ms": self.latency_ms,
        }


class ScriptedBackend:
    """Immutable fixture-keyed backend. Safe for concurrent reads."""

    def __init__(self, entries: list[FixtureEntry] | None = None):
        self._entries: dict[tuple[str, str], FixtureEntry] = {}
        for entry in entries or []:
            self.add(entry)
        self._loaded = True

    def add(self, entry: FixtureEntry) -> None:
        if not entry.token_probs:
            raise ValueError(
                f"fixture ({entry.template_id}, {entry.fixture_key}) has no token probabilities"
            )
        for p in entry.token_probs:
            if not (0.0 < p <= 1.0):
                raise ValueError(
                    f"fixture ({entry.template_id}, {entry.fixture_key}) "
                    f"probability {p} outside (0, 1]"
                )
        self._entries[(entry.template_id, entry.fixture_key)] = entry

    @classmethod
    def from_jsonl(cls, path: str | Path) -> "ScriptedBackend":
        backend = cls()
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if line:
                    backend.add(FixtureEntry.from_dict(json.loads(line)))
        return backend

    def complete(self, template_id: str, fixture_key: str, prompt: str,
                 budget: TimeBudget | None = None) -> ModelResponse:
        entry = self._entries.get((template_id, fixture_key))
        if entry is None:
            raise UnknownFixture(
                f"no scripted response for ({template_id!r}, {fixture_key!r})"
            )
        latency = entry.latency_ms / 1000.0
        if budget is not None:
            budget.spend(latency)
        return ModelResponse(entry.text, entry.token_probs, latency)


class Recorder:
    """Append every response of the wrapped backend to a JSONL fixture file."""

    def __init__(self, inner, path: str | Path):
        self._inner = inner
        self._path = Path(path)
        self._lock = threading.Lock()

    def complete(self, template_id: str, fixture_key: str, prompt: str,
                 budget: TimeBudget | None = None) -> ModelResponse:
        response = self._inner.complete(template_id, fixture_key, prompt, budget)
        entry = FixtureEntry(
            template_id=template_id,
            fixture_key=fixture_key,
            text=response.text,
            token_probs=response.token_probs,
            latency_ms=response.latency * 1000.0,
        )
        with self._lock, open(self._path, "a", encoding="utf-8") as fh:
            fh.write(json.dumps(entry.to_dict()) + "\n")
        return response


class RemoteBackend:
    """JSON-over-HTTP client mirroring the request/response shapes.

    POSTs {"template_id", "fixture_key", "prompt", "max_tokens"} and expects
    {"text", "token_probs", "latency_ms"} back.
    """

    def __init__(self, endpoint: str, timeout_s: float = 10.0):
        self.endpoint = endpoint
        self.timeout_s = timeout_s

    def complete(self, template_id: str, fixture_key: str, prompt: str,
                 budget: TimeBudget | None = None) -> ModelResponse:
        payload = json.dumps(
            {"template_id": template_id, "fixture_key": fixture_key, "prompt": prompt}
        ).encode("utf-8")
        request = urllib.request.Request(
            self.endpoint, data=payload, headers={"Content-Type": "application/json"}
        )
        timeout = self.timeout_s
        if budget is not None:
            timeout = min(timeout, max(budget.remaining(), 0.0))
            if timeout <= 0:
                raise BackendTimeout("no time left for remote call")
        try:
            with urllib.request.urlopen(request, timeout=timeout) as raw:
                body = json.loads(raw.read().decode("utf-8"))
        except TimeoutError as exc:
            raise BackendTimeout(str(exc)) from exc
        return ModelResponse(
            text=body["text"],
            token_probs=tuple(float(p) for p in body["token_probs"]),
            latency=float(body.get("latency_ms", 0.0)) / 1000.0,
        )


@dataclass
class ModelGateway:
    """Template registry plus a pluggable completion backend."""

    backend: ScriptedBackend | Recorder | RemoteBackend
    _templates: dict[str, PromptTemplate] = field(default_factory=dict)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def register_template(
        self,
        template_id: str,
        body: str,
        required_slots: set[str],
        requires_image: bool = False,
    ) -> None:
        with self._lock:
            if template_id in self._templates:
                raise DuplicateTemplate(f"template {template_id!r} already registered")
            self._templates[template_id] = PromptTemplate(
                template_id, body, frozenset(required_slots), requires_image
            )

    def template(self, template_id: str) -> PromptTemplate:
        try:
            return self._templates[template_id]
        except KeyError:
            raise UnknownTemplate(f"no template {template_id!r}") from None

    def generate(self, request: ModelRequest, budget: TimeBudget | None = None) -> ModelResponse:
        template = self.template(request.template_id)
        if template.requires_image and request.image_ref is None:
            raise MissingSlot(
                f"template {request.template_id!r} requires an image reference"
            )
        prompt = template.render(request.slots)
        fixture_key = request.slots.get(FIXTURE_KEY_SLOT, "")
        return self.backend.complete(request.template_id, fixture_key, prompt, budget)
