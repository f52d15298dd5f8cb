"""Triad corpus reading.

The training file is UTF-8 line-delimited JSON with triad records of the form
``{"kind": "triad", "original": ..., "type": ..., "reformulated": ...,
"domain": ..., "source": ...}``; other record kinds are ignored.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .textproc import GENERABLE_TYPES


@dataclass(frozen=True)
class Triad:
    original: str
    type: str
    reformulated: str
    domain: str = "hybrid"
    source: str = "logged"


def load_triads(path: str | Path) -> list[Triad]:
    triads = []
    with open(path, encoding="utf-8") as handle:
        for line_no, raw in enumerate(handle, start=1):
            raw = raw.strip()
            if not raw:
                continue
            record = json.loads(raw)
            if record.get("kind", "triad") != "triad":
                continue
            for key in ("original", "type", "reformulated"):
                if key not in record:
                    raise ValueError(f"line {line_no}: triad record missing {key!r}")
            triads.append(
                Triad(
                    original=record["original"],
                    type=record["type"],
                    reformulated=record["reformulated"],
                    domain=record.get("domain", "hybrid"),
                    source=record.get("source", "logged"),
                )
            )
    return triads


def generable_triads(triads: list[Triad], domain: str | None = None) -> list[Triad]:
    """Training subset: generable types only, optionally filtered by domain.

    ``hybrid`` pools the movie and travel domains.
    """
    kept = [t for t in triads if t.type in GENERABLE_TYPES]
    if domain is None or domain == "hybrid":
        allowed = {"movie", "travel", "hybrid"}
    else:
        allowed = {domain}
    return [t for t in kept if t.domain in allowed]
