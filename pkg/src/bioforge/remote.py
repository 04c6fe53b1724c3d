"""Minimal JSON-over-HTTP bridge to an external script generator."""

from __future__ import annotations

import json
import logging
import os
import re
import time
import urllib.error
import urllib.request
from dataclasses import dataclass

log = logging.getLogger(__name__)

ENDPOINT_ENV = "BIOFORGE_ENDPOINT"


class AdapterError(RuntimeError):
    """Transport, timeout or protocol failure talking to the remote generator."""


@dataclass(frozen=True)
class AdapterConfig:
    endpoint: str | None = None
    temperature: float = 0.1
    timeout: float = 30.0
    max_retries: int = 2
    backoff: float = 0.5
    token: str | None = None

    def __post_init__(self):
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")

    def resolved_endpoint(self) -> str | None:
        return os.environ.get(ENDPOINT_ENV) or self.endpoint


def call_remote_generator(prompt: str, context: list[str], cfg: AdapterConfig) -> str:
    """POST the prompt and context texts; return the ``text`` field of the reply."""
    endpoint = cfg.resolved_endpoint()
    if not endpoint:
        raise AdapterError(f"no endpoint configured (set {ENDPOINT_ENV})")
    body = json.dumps({"prompt": prompt, "context": list(context),
                       "temperature": cfg.temperature}).encode("utf-8")
    headers = {"Content-Type": "application/json"}
    if cfg.token:
        headers["Authorization"] = f"Bearer {cfg.token}"
    last: Exception | None = None
    for attempt in range(cfg.max_retries + 1):
        if attempt:
            time.sleep(cfg.backoff * 2 ** (attempt - 1))
        req = urllib.request.Request(endpoint, data=body, headers=headers, method="POST")
        try:
            with urllib.request.urlopen(req, timeout=cfg.timeout) as resp:
                reply = json.loads(resp.read().decode("utf-8"))
        except (urllib.error.URLError, TimeoutError, OSError, ValueError) as err:
            last = err
            log.warning("remote generator attempt %d failed: %s", attempt + 1, err)
            continue
        if not isinstance(reply, dict) or not isinstance(reply.get("text"), str):
            raise AdapterError("reply must be a JSON object with a string 'text' field")
        return reply["text"]
    raise AdapterError(f"remote generator unreachable after {cfg.max_retries + 1} attempts: {last}")


_FENCE = re.compile(r"```[^\n`]*\n(.*?)```", re.DOTALL)


def extract_script(raw: str) -> str:
    """Pull the program out of free-form model output.

    Preference order: the first fenced block, then everything from the first
    line that starts with ``design``, then the text unchanged.
    """
    fence = _FENCE.search(raw)
    if fence:
        return fence.group(1)
    lines = raw.splitlines(keepends=True)
    for i, line in enumerate(lines):
        if line.startswith("design"):
            return "".join(lines[i:])
    return raw
