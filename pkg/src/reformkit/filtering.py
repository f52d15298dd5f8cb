"""Acceptability filtering and reading-difficulty comparison.

The heuristic filter runs with no model weights: surface degeneracy guards
plus a grade-level readability check.  A remote classifier can be plugged in
through the same verdict type via the acceptability wire endpoint.
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass

from .dialogue import ReformulationType
from .errors import DataError
from .text import content_tokens, tokenize

#: Width of the "same difficulty" band, in grade levels.  Calibrated to
#: absorb syllable-counter noise.
GRADE_EPSILON = 0.5

MAX_TOKENS = 64
MAX_TOKEN_REPEATS = 4
MAX_BIGRAM_REPEATS = 2

RULE_LENGTH = "length"
RULE_TOKEN_REPETITION = "token-repetition"
RULE_BIGRAM_REPETITION = "bigram-repetition"
RULE_NO_CONTENT = "no-content"
RULE_DIFFICULTY = "difficulty-increase"

_SENTENCE_SPLIT = re.compile(r"[.!?]+")
_VOWELS = set("aeiouy")


@dataclass(frozen=True, slots=True)
class AcceptabilityVerdict:
    acceptable: bool
    reasons: tuple[str, ...]
    readability_grade: float
    backend_id: str = "heuristic"

    def __post_init__(self) -> None:
        if self.acceptable and self.reasons:
            raise ValueError("an acceptable verdict cannot carry reasons")
        object.__setattr__(self, "reasons", tuple(self.reasons))


def count_syllables(word: str) -> int:
    """Heuristic syllable count: vowel groups with a silent-e adjustment.

    A final "e" is dropped only when it forms its own vowel group (as in
    "time"); a consonant + "le" ending stays syllabic (as in "simple").
    """
    letters = "".join(ch for ch in word.lower() if ch.isalpha())
    if not letters:
        return 1
    groups = 0
    previous_vowel = False
    for ch in letters:
        is_vowel = ch in _VOWELS
        if is_vowel and not previous_vowel:
            groups += 1
        previous_vowel = is_vowel
    if letters.endswith("e") and groups > 1:
        if len(letters) >= 3 and letters.endswith("le") and letters[-3] not in _VOWELS:
            pass
        elif letters[-2] not in _VOWELS:
            groups -= 1
    return max(groups, 1)


def _sentence_count(text: str) -> int:
    chunks = [c for c in _SENTENCE_SPLIT.split(text) if c.strip()]
    return max(len(chunks), 1)


def readability_grade(text: str) -> float:
    """Grade-level score from words per sentence and syllables per word.

    Deterministic; raises :class:`DataError` when the text has no tokens.
    """
    words = tokenize(text)
    if not words:
        raise DataError("cannot grade an utterance with no tokens")
    sentences = _sentence_count(text)
    syllables = sum(count_syllables(w) for w in words)
    return 0.39 * (len(words) / sentences) + 11.8 * (syllables / len(words)) - 15.59


def heuristic_acceptable(
    candidate: str,
    original: str,
    target_type: ReformulationType,
    relaxed: bool = False,
) -> AcceptabilityVerdict:
    """Rule-based acceptability verdict for a generated candidate.

    Rules: sane token count, no degenerate token or bigram repetition, at
    least one content token, and (for simplification) no readability
    increase over the original.  ``relaxed`` disables the repetition guards.
    """
    tokens = tokenize(candidate)
    reasons: list[str] = []
    if not 1 <= len(tokens) <= MAX_TOKENS:
        reasons.append(RULE_LENGTH)
    if not relaxed:
        token_counts = Counter(tokens)
        if token_counts and max(token_counts.values()) > MAX_TOKEN_REPEATS:
            reasons.append(RULE_TOKEN_REPETITION)
        bigram_counts = Counter(zip(tokens, tokens[1:]))
        if bigram_counts and max(bigram_counts.values()) > MAX_BIGRAM_REPEATS:
            reasons.append(RULE_BIGRAM_REPETITION)
    if not content_tokens(candidate):
        reasons.append(RULE_NO_CONTENT)
    grade = readability_grade(candidate) if tokens else 0.0
    if target_type is ReformulationType.SIMPLIFY and tokens:
        if grade > readability_grade(original):
            reasons.append(RULE_DIFFICULTY)
    return AcceptabilityVerdict(
        acceptable=not reasons,
        reasons=tuple(reasons),
        readability_grade=grade,
        backend_id="heuristic",
    )


def compare_difficulty(candidate: str, original: str, epsilon: float = GRADE_EPSILON) -> int:
    """Ordinal difficulty of a candidate against the original utterance.

    0 when the candidate reads more easily, 1 when both are within the
    epsilon band, 2 when the candidate reads harder.
    """
    delta = readability_grade(candidate) - readability_grade(original)
    if delta < -epsilon:
        return 0
    if delta > epsilon:
        return 2
    return 1


def remote_acceptable(candidate: str, client) -> AcceptabilityVerdict:
    """Verdict from a remote acceptability classifier.

    ``client`` is a ``remote.RemoteClient`` (or anything exposing
    ``acceptable(text) -> (bool, float)``).  The grade is still computed
    locally so verdicts stay comparable across backends.
    """
    accepted, score = client.acceptable(candidate)
    reasons = () if accepted else ("remote-classifier",)
    return AcceptabilityVerdict(
        acceptable=accepted,
        reasons=reasons,
        readability_grade=readability_grade(candidate),
        backend_id="remote",
    )
