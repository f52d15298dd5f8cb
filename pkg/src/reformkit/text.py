"""Shared tokenizer and content-word helpers.

One tokenizer is used everywhere (generator contracts, filtering, and
text-overlap metrics) so that their guarantees compose.
"""

from __future__ import annotations

import string
from functools import lru_cache
from importlib import resources

_EDGE_PUNCT = string.punctuation + "‘’“”…"
# Apostrophes stay inside tokens ("i'm"); hyphens split compounds so that
# "light-hearted" and "light hearted" tokenize identically.
_KEEP_INTERNAL = {"'"}


def _data_text(name: str) -> str:
    return resources.files("reformkit.data").joinpath(name).read_text(encoding="utf-8")


@lru_cache(maxsize=1)
def data_version() -> str:
    """Version tag of the shipped lexica; generator outputs are stable per tag."""
    return _data_text("VERSION").strip()


@lru_cache(maxsize=1)
def stopwords() -> frozenset[str]:
    words = set()
    for line in _data_text("stopwords.txt").splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            words.add(line)
    return frozenset(words)


def tokenize(text: str) -> list[str]:
    """Lowercase tokens split on whitespace and hyphens, edge punctuation stripped.

    Idempotent on its own joined output; returns [] for empty input.
    """
    tokens = []
    for chunk in text.lower().replace("-", " ").replace("–", " ").split():
        token = chunk.strip(_EDGE_PUNCT.replace("'", ""))
        token = token.strip(string.whitespace)
        # strip leading/trailing apostrophes too, but keep internal ones
        token = token.strip("'")
        if token:
            tokens.append(token)
    return tokens


def content_tokens(text: str) -> list[str]:
    """Tokens that remain after dropping stopwords and politeness markers."""
    stop = stopwords()
    return [t for t in tokenize(text) if t not in stop]


def surface_words(text: str) -> list[str]:
    """Whitespace-split words with edge punctuation stripped but casing kept."""
    words = []
    for chunk in text.split():
        word = chunk.strip(_EDGE_PUNCT.replace("'", "")).strip("'")
        if word:
            words.append(word)
    return words


def content_surface(text: str) -> list[str]:
    """Surface words whose tokens are not all stopwords."""
    stop = stopwords()
    kept = []
    for word in surface_words(text):
        parts = tokenize(word)
        if parts and any(p not in stop for p in parts):
            kept.append(word)
    return kept
