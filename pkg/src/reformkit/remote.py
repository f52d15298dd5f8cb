"""HTTP client for remote generation and acceptability backends.

Wire protocol (UTF-8 JSON bodies):

* ``POST /generate`` with ``{"utterance", "type", "domain", "num_candidates"}``
  answers 200 with ``{"candidates": [{"text", "score"?}, ...]}``; 422 for an
  unknown type string, 503 when the model is unavailable.
* ``POST /acceptability`` with ``{"utterance"}`` answers
  ``{"acceptable": bool, "score": number}``.
* ``GET /health`` answers ``{"status": "ok"}``.

Each request carries a fresh correlation id so concurrent in-flight calls can
be traced.  Credentials, if any, come from ``REFORMKIT_BACKEND_TOKEN``.
"""

from __future__ import annotations

import os
import uuid

import requests

from .errors import (
    BackendSchemaError,
    BackendStatusError,
    BackendTransportError,
    ZeroCandidatesError,
)
from .generators import GenerationCandidate, GenerationRequest

DEFAULT_TIMEOUT = 10.0
TOKEN_ENV_VAR = "REFORMKIT_BACKEND_TOKEN"


class RemoteClient:
    """Thin, thread-safe client for the generation/acceptability service."""

    backend_id = "remote"

    def __init__(self, base_url: str, timeout: float = DEFAULT_TIMEOUT, token: str | None = None):
        self.base_url = base_url.rstrip("/")
        self.timeout = timeout
        self.token = token if token is not None else os.environ.get(TOKEN_ENV_VAR)

    def _headers(self) -> dict[str, str]:
        headers = {"X-Request-Id": uuid.uuid4().hex}
        if self.token:
            headers["Authorization"] = f"Bearer {self.token}"
        return headers

    def post_raw(self, path: str, payload: dict) -> tuple[int, object]:
        """POST a raw payload; returns (status, parsed body). Used by probes."""
        url = f"{self.base_url}{path}"
        try:
            response = requests.post(
                url, json=payload, timeout=self.timeout, headers=self._headers()
            )
        except (requests.Timeout, requests.ConnectionError) as exc:
            raise BackendTransportError(f"cannot reach {url}: {exc}") from None
        try:
            body = response.json()
        except ValueError:
            body = None
        return response.status_code, body

    def _post(self, path: str, payload: dict) -> dict:
        status, body = self.post_raw(path, payload)
        if status == 422:
            raise BackendStatusError(422, f"request rejected by {path}")
        if status == 503:
            raise BackendStatusError(503, "model unavailable")
        if status != 200:
            raise BackendStatusError(status, f"unexpected status from {path}")
        if not isinstance(body, dict):
            raise BackendSchemaError(f"{path} answered with a non-object body")
        return body

    def generate(self, request: GenerationRequest) -> list[GenerationCandidate]:
        payload = {
            "utterance": request.utterance,
            "type": request.target_type.value,
            "domain": request.domain,
            "num_candidates": request.num_candidates,
        }
        body = self._post("/generate", payload)
        raw_candidates = body.get("candidates")
        if not isinstance(raw_candidates, list):
            raise BackendSchemaError("'candidates' must be a list")
        candidates: list[GenerationCandidate] = []
        for item in raw_candidates:
            if not isinstance(item, dict) or not isinstance(item.get("text"), str):
                raise BackendSchemaError("each candidate must be an object with a 'text' string")
            score = item.get("score")
            if score is not None and not isinstance(score, (int, float)):
                raise BackendSchemaError("candidate 'score' must be a number when present")
            if not item["text"]:
                raise BackendSchemaError("candidate 'text' must be non-empty")
            candidates.append(
                GenerationCandidate(
                    text=item["text"],
                    target_type=request.target_type,
                    backend_id="remote",
                    score=float(score) if score is not None else None,
                )
            )
        if not candidates:
            raise ZeroCandidatesError("backend returned zero candidates")
        return candidates

    def acceptable(self, utterance: str) -> tuple[bool, float]:
        body = self._post("/acceptability", {"utterance": utterance})
        accepted = body.get("acceptable")
        score = body.get("score")
        if not isinstance(accepted, bool) or not isinstance(score, (int, float)):
            raise BackendSchemaError(
                "acceptability response must carry a boolean 'acceptable' and numeric 'score'"
            )
        return accepted, float(score)

    def health(self) -> dict:
        url = f"{self.base_url}/health"
        try:
            response = requests.get(url, timeout=self.timeout, headers=self._headers())
        except (requests.Timeout, requests.ConnectionError) as exc:
            raise BackendTransportError(f"cannot reach {url}: {exc}") from None
        if response.status_code != 200:
            raise BackendStatusError(response.status_code, "health check failed")
        try:
            body = response.json()
        except ValueError:
            raise BackendSchemaError("health endpoint answered with a non-JSON body") from None
        if not isinstance(body, dict):
            raise BackendSchemaError("health endpoint answered with a non-object body")
        return body
