"""HTTP service exposing generation and acceptability over the wire protocol.

Endpoints:

* ``POST /generate``  {"utterance", "type", "domain"?, "num_candidates"?}
  -> 200 {"candidates": [{"text", "score"}, ...]}, 422 for an unknown type,
  503 when the generator artifact is missing.
* ``POST /acceptability``  {"utterance"} -> {"acceptable", "score"},
  503 when the classifier artifact is missing.
* ``GET /health`` -> {"status": "ok"}.

The service is stateless between requests; sampling seeds derive from the
configured decoding seed plus the request content, so identical requests
produce identical answers.
"""

from __future__ import annotations

from pathlib import Path
from typing import Literal

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from .classifier import AcceptabilityClassifier, load_classifier
from .train import FittedModel, load_artifact

GENERATOR_FILE = "generator.pt"
CLASSIFIER_FILE = "classifier.pt"


class GenerateRequest(BaseModel):
    utterance: str = Field(min_length=1)
    type: Literal["start_restart", "repeat", "rephrase", "simplify", "refine"]
    domain: str | None = None
    num_candidates: int = Field(default=1, ge=1, le=16)


class Candidate(BaseModel):
    text: str
    score: float


class GenerateResponse(BaseModel):
    candidates: list[Candidate]


class AcceptabilityRequest(BaseModel):
    utterance: str = Field(min_length=1)


class AcceptabilityResponse(BaseModel):
    acceptable: bool
    score: float


def create_app(artifact_dir: str | Path) -> FastAPI:
    artifact_dir = Path(artifact_dir)
    app = FastAPI(title="reformkit-backend")
    state: dict[str, object] = {"generator": None, "classifier": None}

    def generator() -> FittedModel:
        if state["generator"] is None:
            path = artifact_dir / GENERATOR_FILE
            if not path.exists():
                raise HTTPException(status_code=503, detail="generator artifact missing")
            state["generator"] = load_artifact(path)
        return state["generator"]  # type: ignore[return-value]

    def classifier() -> AcceptabilityClassifier:
        if state["classifier"] is None:
            path = artifact_dir / CLASSIFIER_FILE
            if not path.exists():
                raise HTTPException(status_code=503, detail="classifier artifact missing")
            state["classifier"] = load_classifier(path)
        return state["classifier"]  # type: ignore[return-value]

    @app.get("/health")
    def health() -> dict:
        return {"status": "ok"}

    @app.post("/generate", response_model=GenerateResponse)
    def generate(request: GenerateRequest) -> GenerateResponse:
        fitted = generator()
        candidates = []
        for index in range(request.num_candidates):
            text, score = fitted.generate(
                request.utterance,
                request.type,
                seed_parts=(request.utterance, request.type, index),
            )
            if not text:
                # degenerate decode; echo the input rather than answer empty
                text, score = request.utterance, 0.0
            candidates.append(Candidate(text=text, score=score))
        return GenerateResponse(candidates=candidates)

    @app.post("/acceptability", response_model=AcceptabilityResponse)
    def acceptability(request: AcceptabilityRequest) -> AcceptabilityResponse:
        accepted, score = classifier().acceptable(request.utterance)
        return AcceptabilityResponse(acceptable=accepted, score=score)

    return app
