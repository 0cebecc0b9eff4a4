"""Policy contract, reference baselines, and a remote chat-completions client.

A policy is any object with a ``name`` attribute and a
``respond(sample, system_prompt) -> str`` method returning the raw final-turn
text. ``run_policy`` times the call, parses the reply into ranked actions,
and converts any exception into a degenerate (empty-action) output so that a
full evaluation never aborts on one bad sample.
"""

from __future__ import annotations

import base64
import hashlib
import json
import os
import random
import threading
import time
from dataclasses import dataclass
from pathlib import Path

import requests

from .actions import (
    Action,
    RankedActions,
    format_ranked_actions,
    parse_ranked_actions,
)
from .dataset import Sample
from .prompts import SystemPrompt, constrained_zero_shot_prompt


class ConfigurationError(RuntimeError):
    """The client is not usable as configured (e.g. missing API key)."""


class TransportError(RuntimeError):
    """All retries were exhausted without a definitive endpoint answer."""


class EndpointError(RuntimeError):
    """The endpoint answered with a non-retryable error status."""

    def __init__(self, status: int, body_excerpt: str):
        super().__init__(f"endpoint returned HTTP {status}: {body_excerpt}")
        self.status = status
        self.body_excerpt = body_excerpt


@dataclass(frozen=True)
class PolicyOutput:
    raw_text: str
    actions: RankedActions
    latency: float
    policy_name: str
    error: str | None = None


@dataclass(frozen=True)
class RemoteEndpointConfig:
    base_url: str
    model_name: str
    api_key_env: str = "SOCNAV_API_KEY"
    timeout: float = 30.0
    max_retries: int = 3
    max_in_flight: int = 4

    def __post_init__(self):
        if self.timeout <= 0.0:
            raise ValueError("timeout must be positive")
        if self.max_retries < 0:
            raise ValueError("max_retries must be non-negative")
        if self.max_in_flight < 1:
            raise ValueError("max_in_flight must be at least 1")


def run_policy(policy, sample: Sample, system_prompt: SystemPrompt | None = None) -> PolicyOutput:
    """Invoke a policy on one sample; failures become degenerate outputs."""
    start = time.perf_counter()
    error = None
    try:
        raw = policy.respond(sample, system_prompt)
    except Exception as exc:  # policy failures are scored, not raised
        raw = ""
        error = f"{type(exc).__name__}: {exc}"
    latency = time.perf_counter() - start
    return PolicyOutput(
        raw_text=raw,
        actions=parse_ranked_actions(raw),
        latency=latency,
        policy_name=policy.name,
        error=error,
    )


class OraclePolicy:
    """Replays the stored ground truth; the perfect-score reference."""

    name = "oracle"

    def respond(self, sample: Sample, system_prompt: SystemPrompt | None = None) -> str:
        return format_ranked_actions(sample.gt_actions)


class GreedyForwardPolicy:
    """Always answers with the single most efficient primitive."""

    name = "greedy-forward"

    def respond(self, sample: Sample, system_prompt: SystemPrompt | None = None) -> str:
        return f"1.{Action.MOVE_FORWARD.value}"


class NoisyOraclePolicy:
    """Oracle corrupted on a seeded epsilon fraction of samples.

    A corrupted reply differs from the ground truth by one edit: an action is
    replaced by one outside the ground-truth set, or such an action is
    appended when the list is short enough. When the ground truth already
    covers all six actions no outside action exists, so the edit drops one
    entry instead. Decisions are keyed per sample id, independent of
    evaluation order.
    """

    def __init__(self, epsilon: float, seed: int = 0):
        if not 0.0 <= epsilon <= 1.0:
            raise ValueError("epsilon must be in [0, 1]")
        self.epsilon = epsilon
        self.seed = seed
        self.name = f"noisy-oracle(eps={epsilon:g})"

    def _rng_for(self, sample_id: str) -> random.Random:
        digest = hashlib.sha256(f"{self.seed}:{sample_id}".encode("utf-8")).digest()
        return random.Random(int.from_bytes(digest[:8], "big"))

    def respond(self, sample: Sample, system_prompt: SystemPrompt | None = None) -> str:
        rng = self._rng_for(sample.id)
        gt = list(sample.gt_actions)
        if rng.random() >= self.epsilon:
            return format_ranked_actions(gt)
        outside = [a for a in Action if a not in gt]
        if not outside:
            del gt[rng.randrange(len(gt))]
        elif len(gt) < 6 and rng.random() < 0.5:
            gt.append(rng.choice(outside))
        else:
            gt[rng.randrange(len(gt))] = rng.choice(outside)
        return format_ranked_actions(gt)


# ---------------------------------------------------------------------------
# remote endpoint client

_RETRYABLE_STATUSES = frozenset({429, 500, 502, 503, 504})
_BACKOFF_BASE_S = 1.0

# one semaphore per endpoint config, shared process-wide, so max_in_flight
# caps concurrent requests no matter how many policies reuse the config
_GATES: dict[RemoteEndpointConfig, threading.BoundedSemaphore] = {}
_GATES_LOCK = threading.Lock()


def _gate_for(config: RemoteEndpointConfig) -> threading.BoundedSemaphore:
    with _GATES_LOCK:
        gate = _GATES.get(config)
        if gate is None:
            gate = threading.BoundedSemaphore(config.max_in_flight)
            _GATES[config] = gate
        return gate


def _backoff_delay(attempt: int) -> float:
    return _BACKOFF_BASE_S * (2.0 ** attempt) * (1.0 + 0.25 * random.random())


def _image_part(image: bytes) -> dict:
    encoded = base64.b64encode(image).decode("ascii")
    return {
        "type": "image_url",
        "image_url": {"url": f"data:image/x-portable-pixmap;base64,{encoded}"},
    }


def build_messages(system: str, turns, image: bytes | None = None) -> list[dict]:
    """Assemble chat messages; the image rides on the first user turn."""
    messages: list[dict] = []
    if system:
        messages.append({"role": "system", "content": system})
    image_pending = image is not None
    for role, text in turns:
        if role == "user" and image_pending:
            messages.append(
                {"role": "user", "content": [{"type": "text", "text": text},
                                             _image_part(image)]}
            )
            image_pending = False
        else:
            messages.append({"role": role, "content": text})
    return messages


def remote_complete(config: RemoteEndpointConfig, system: str, turns,
                    image: bytes | None = None, recorder=None) -> str:
    """POST one chat-completions request, retrying transient failures.

    Retries use exponential backoff (1 s base, factor 2, jitter). Non-2xx
    statuses outside the retryable set raise EndpointError immediately;
    exhausted retries raise TransportError.
    """
    api_key = os.environ.get(config.api_key_env, "")
    if not api_key:
        raise ConfigurationError(
            f"environment variable {config.api_key_env} is not set"
        )
    payload = {
        "model": config.model_name,
        "messages": build_messages(system, turns, image),
    }
    url = config.base_url.rstrip("/") + "/chat/completions"
    headers = {"Authorization": f"Bearer {api_key}"}
    gate = _gate_for(config)
    attempt = 0
    while True:
        try:
            with gate:
                response = requests.post(
                    url, json=payload, headers=headers, timeout=config.timeout
                )
        except requests.RequestException as exc:
            if attempt >= config.max_retries:
                raise TransportError(
                    f"request failed after {attempt} retries: {exc}"
                ) from exc
            time.sleep(_backoff_delay(attempt))
            attempt += 1
            continue
        if response.status_code in _RETRYABLE_STATUSES:
            if attempt >= config.max_retries:
                raise TransportError(
                    f"giving up after {attempt} retries: HTTP {response.status_code}"
                )
            time.sleep(_backoff_delay(attempt))
            attempt += 1
            continue
        if not 200 <= response.status_code < 300:
            raise EndpointError(response.status_code, response.text[:200])
        data = response.json()
        try:
            text = data["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError) as exc:
            raise EndpointError(response.status_code,
                                f"malformed completion body: {response.text[:200]}") from exc
        if recorder is not None:
            recorder(payload, {"status": response.status_code, "text": text})
        return text


class RemotePolicy:
    """Vision-language endpoint behind the policy contract.

    ``single_shot`` mode sends the constrained prompt plus the scene image in
    one request. ``conversational`` mode walks the three-stage question
    script, feeding the model its own intermediate answers (the stored
    assistant turns are withheld) and returns the final-stage reply.
    """

    def __init__(self, config: RemoteEndpointConfig, mode: str = "single_shot",
                 image_root: Path | str | None = None,
                 record_path: Path | str | None = None,
                 extra_reasoning_turn: str | None = None):
        if mode not in ("single_shot", "conversational"):
            raise ValueError(f"unknown mode {mode!r}")
        self.config = config
        self.mode = mode
        self.image_root = Path(image_root) if image_root is not None else None
        self.extra_reasoning_turn = extra_reasoning_turn
        self.name = f"remote:{config.model_name}"
        self._record_path = Path(record_path) if record_path is not None else None
        self._record_lock = threading.Lock()

    def _recorder(self, payload: dict, response: dict) -> None:
        if self._record_path is None:
            return
        line = json.dumps({"request": payload, "response": response},
                          ensure_ascii=False)
        with self._record_lock:
            with self._record_path.open("a", encoding="utf-8") as fh:
                fh.write(line + "\n")

    def _load_image(self, sample: Sample) -> bytes | None:
        if sample.image_path is None or self.image_root is None:
            return None
        return (self.image_root / sample.image_path).read_bytes()

    def _complete(self, system: str, turns, image: bytes | None) -> str:
        return remote_complete(self.config, system, turns, image,
                               recorder=self._recorder)

    def respond(self, sample: Sample, system_prompt: SystemPrompt | None = None) -> str:
        system = system_prompt.text if system_prompt is not None else ""
        image = self._load_image(sample)
        if self.mode == "single_shot":
            turns = [("user", constrained_zero_shot_prompt())]
            return self._complete(system, turns, image)
        history: list[tuple[str, str]] = []
        user_turns = [t.text for t in sample.turns if t.role == "user"]
        reply = ""
        for i, question in enumerate(user_turns):
            if self.extra_reasoning_turn and i == len(user_turns) - 1:
                history.append(("user", self.extra_reasoning_turn))
                history.append(("assistant", self._complete(system, history, image)))
            history.append(("user", question))
            reply = self._complete(system, history, image)
            history.append(("assistant", reply))
        return reply


def make_policy(spec: str, remote_config: RemoteEndpointConfig | None = None,
                mode: str = "single_shot", image_root: Path | str | None = None,
                record_path: Path | str | None = None):
    """Build a policy from a CLI spec: oracle | greedy | noisy:EPS[:SEED] | remote."""
    if spec == "oracle":
        return OraclePolicy()
    if spec == "greedy":
        return GreedyForwardPolicy()
    if spec.startswith("noisy:"):
        parts = spec.split(":")
        epsilon = float(parts[1])
        seed = int(parts[2]) if len(parts) > 2 else 0
        return NoisyOraclePolicy(epsilon, seed)
    if spec == "remote":
        if remote_config is None:
            raise ValueError("remote policy requires endpoint configuration")
        return RemotePolicy(remote_config, mode=mode, image_root=image_root,
                            record_path=record_path)
    raise ValueError(f"unknown policy spec {spec!r}")
