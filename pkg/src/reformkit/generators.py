"""Type-conditioned utterance generation.

One contract covers two backends: deterministic rule-based reference
generators (usable with no model weights) and a client for a remote neural
service speaking the HTTP wire protocol.  The rule generators are pure
functions of (utterance, slots, seed) and their outputs are stable per
shipped data-file version.
"""

from __future__ import annotations

import json
import random
import re
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Protocol, Sequence

from .dialogue import GENERABLE_TYPES, ReformulationType, SlotAnnotation
from .errors import ZeroCandidatesError
from .text import _data_text, content_surface, content_tokens, tokenize

_TRAILING_PUNCT = ".!?,;: "


@dataclass(frozen=True, slots=True)
class GenerationRequest:
    """Conditioning input for one generation call."""

    utterance: str
    target_type: ReformulationType
    domain: str = "movie"
    slots: tuple[SlotAnnotation, ...] = ()
    num_candidates: int = 1
    seed: int = 0

    def __post_init__(self) -> None:
        if not self.utterance.strip():
            raise ValueError("utterance must be non-empty")
        if self.target_type not in GENERABLE_TYPES:
            raise ValueError(f"{self.target_type.value!r} is not a generable type")
        if self.num_candidates < 1:
            raise ValueError("num_candidates must be at least 1")
        object.__setattr__(self, "slots", tuple(self.slots))


@dataclass(frozen=True, slots=True)
class GenerationCandidate:
    text: str
    target_type: ReformulationType
    backend_id: str
    score: float | None = None

    def __post_init__(self) -> None:
        if not self.text:
            raise ValueError("candidate text must be non-empty")


class GenerationBackend(Protocol):
    backend_id: str

    def generate(self, request: GenerationRequest) -> list[GenerationCandidate]: ...


@lru_cache(maxsize=1)
def _templates() -> dict:
    return json.loads(_data_text("templates.json"))


@lru_cache(maxsize=1)
def _synonyms() -> dict[str, str]:
    return json.loads(_data_text("synonyms.json"))


@lru_cache(maxsize=1)
def _frames() -> list[tuple[re.Pattern[str], str]]:
    return [(re.compile(p), out) for p, out in _templates()["rephrase_frames"]]


def _normalize(u: str) -> str:
    return " ".join(u.split()).rstrip(_TRAILING_PUNCT)


def rule_repeat(u: str) -> str:
    """Repeat the previous utterance verbatim."""
    return u


def _present_slot_values(u: str, slots: Iterable[SlotAnnotation]) -> list[str]:
    u_tokens = set(tokenize(u))
    present = []
    for slot in slots:
        value_tokens = tokenize(slot.value)
        if value_tokens and all(t in u_tokens for t in value_tokens):
            present.append(slot.value)
    return present


def rule_simplify(u: str, slots: Sequence[SlotAnnotation] = ()) -> str:
    """Reduce an utterance to its essential words.

    Keeps the slot values that actually occur in the utterance when slots are
    given, otherwise keeps the content tokens (stopwords, politeness markers
    and leading discourse fragments dropped).  Output is strictly shorter than
    a multi-token input and lowercased except for slot values.
    """
    in_tokens = tokenize(u)
    if len(in_tokens) <= 1:
        return u
    out_tokens: list[str] = []
    present = _present_slot_values(u, slots)
    if present:
        for value in present:
            out_tokens.extend(value.split())
    if not out_tokens:
        out_tokens = content_tokens(u)
    if not out_tokens:
        out_tokens = [in_tokens[-1]]
    # guarantee a strict reduction for multi-token inputs
    if len(out_tokens) >= len(in_tokens):
        out_tokens = out_tokens[-(len(in_tokens) - 1) :]
    return " ".join(out_tokens)


def _restore_first_capital(text: str) -> str:
    for i, ch in enumerate(text):
        if ch.isalpha():
            return text[:i] + ch.upper() + text[i + 1 :]
    return text


def rule_rephrase(u: str, seed: int = 0) -> str:
    """Say the same thing with different words at about the same length.

    Tries frame transforms first (declarative/interrogative rewrites), then
    seeded synonym substitution, then a minimal politeness rewrite.  The
    output always differs from the input.
    """
    normalized = _normalize(u)
    lowered = normalized.lower()
    for pattern, template in _frames():
        match = pattern.match(lowered)
        if match:
            captured = normalized[match.start(1) : match.end(1)]
            candidate = template.replace("{0}", captured)
            if candidate != u:
                return candidate
    words = u.split()
    lexicon = _synonyms()
    applicable = [i for i, w in enumerate(words) if w.lower().strip(_TRAILING_PUNCT) in lexicon]
    if applicable:
        rng = random.Random(seed)
        k = max(1, len(applicable) // 3)
        chosen = sorted(rng.sample(applicable, k))
        out = list(words)
        for i in chosen:
            word = words[i]
            stripped = word.lower().strip(_TRAILING_PUNCT)
            replacement = lexicon[stripped]
            if word[:1].isupper():
                replacement = _restore_first_capital(replacement)
            trailing = word[len(word.rstrip(_TRAILING_PUNCT)) :]
            out[i] = replacement + trailing
        candidate = " ".join(out)
        if candidate != u:
            return candidate
    if not lowered.endswith("please"):
        return normalized + ", please"
    candidate = "Can you help me with: " + u
    return candidate


def _unused_slot(u: str, slots: Iterable[SlotAnnotation]) -> SlotAnnotation | None:
    u_tokens = set(tokenize(u))
    for slot in slots:
        value_tokens = tokenize(slot.value)
        if value_tokens and not all(t in u_tokens for t in value_tokens):
            return slot
    return None


def rule_refine(u: str, slots: Sequence[SlotAnnotation] = (), domain: str = "movie") -> str:
    """Add one constraint to the previous utterance.

    Uses the first slot whose value is not already mentioned; without one, a
    domain-default constraint is appended.  All content words of the input
    are preserved in the output.
    """
    templates = _templates()
    base = _normalize(u)
    slot = _unused_slot(u, slots)
    if slot is not None:
        clause = templates["refine_slot_clauses"].get(
            slot.slot_kind, templates["refine_slot_fallback"]
        )
        content = " ".join(content_surface(u))
        if "{content}" in clause and not content:
            clause = templates["refine_slot_fallback"]
        return clause.replace("{base}", base).replace("{value}", slot.value).replace(
            "{content}", content
        )
    defaults = templates["refine_domain_defaults"].get(
        domain, templates["refine_domain_defaults"]["hybrid"]
    )
    u_tokens = set(tokenize(u))
    # pick the first default constraint the utterance does not already express
    default = next(
        (d for d in defaults if not set(content_tokens(d)) <= u_tokens), defaults[-1]
    )
    return f"{base} {default}"


def rule_restart(
    u: str, slots: Sequence[SlotAnnotation] = (), domain: str = "movie"
) -> str:
    """Start over with a fresh disclosure of the information need."""
    templates = _templates()
    item = templates["restart_domain_items"].get(domain, templates["restart_domain_items"]["hybrid"])
    for slot in slots:
        template = templates["restart_slot_templates"].get(slot.slot_kind)
        if template:
            return template.replace("{value}", slot.value).replace("{item}", item)
    return f"I am looking for a {item}."


_RULES = {
    ReformulationType.REPEAT: lambda request, seed: rule_repeat(request.utterance),
    ReformulationType.SIMPLIFY: lambda request, seed: rule_simplify(
        request.utterance, request.slots
    ),
    ReformulationType.REPHRASE: lambda request, seed: rule_rephrase(request.utterance, seed),
    ReformulationType.REFINE: lambda request, seed: rule_refine(
        request.utterance, request.slots, request.domain
    ),
    ReformulationType.START_RESTART: lambda request, seed: rule_restart(
        request.utterance, request.slots, request.domain
    ),
}


class RuleBackend:
    """Deterministic template/lexicon-driven generation backend."""

    backend_id = "rule"

    def generate(self, request: GenerationRequest) -> list[GenerationCandidate]:
        rule = _RULES[request.target_type]
        candidates = []
        for i in range(request.num_candidates):
            text = rule(request, request.seed + i)
            candidates.append(
                GenerationCandidate(text=text, target_type=request.target_type, backend_id="rule")
            )
        return candidates


def generate(request: GenerationRequest, backend: GenerationBackend) -> list[GenerationCandidate]:
    """Produce candidates for a request through the given backend.

    A successful call always yields at least one candidate; an empty backend
    answer raises :class:`ZeroCandidatesError`.
    """
    candidates = backend.generate(request)
    if not candidates:
        raise ZeroCandidatesError("backend returned zero candidates")
    return candidates


def remote_generate(request: GenerationRequest, client) -> list[GenerationCandidate]:
    """Generate through a remote wire-protocol client (see ``remote.RemoteClient``)."""
    return generate(request, client)
