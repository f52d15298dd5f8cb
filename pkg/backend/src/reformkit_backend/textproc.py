"""Minimal text processing for the backend.

Kept independent of any client-side tooling; the only contract shared with
clients is the wire protocol.
"""

from __future__ import annotations

import re

_EDGE = re.compile(r"^[^\w]+|[^\w]+$")

GENERABLE_TYPES = ("start_restart", "repeat", "rephrase", "simplify", "refine")


def tokenize(text: str) -> list[str]:
    tokens = []
    for chunk in text.lower().replace("-", " ").split():
        token = _EDGE.sub("", chunk)
        if token:
            tokens.append(token)
    return tokens


def lcs_length(a: list[str], b: list[str]) -> int:
    if not a or not b:
        return 0
    previous = [0] * (len(b) + 1)
    for token in a:
        current = [0]
        for j, other in enumerate(b, start=1):
            if token == other:
                current.append(previous[j - 1] + 1)
            else:
                current.append(max(previous[j], current[j - 1]))
        previous = current
    return previous[-1]


def rouge_l_f1(candidate: list[str], reference: list[str]) -> float:
    if not candidate or not reference:
        return 0.0
    lcs = lcs_length(candidate, reference)
    precision = lcs / len(candidate)
    recall = lcs / len(reference)
    if precision + recall == 0.0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)
