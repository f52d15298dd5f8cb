"""Domain types for annotated dialogues, corpus persistence, and extraction.

A corpus is stored as UTF-8 line-delimited JSON, one record per line.  Two
record kinds exist: ``dialogue`` (a logged conversation with optional
per-turn intent/slot/reformulation annotations) and ``triad`` (an
original utterance, a reformulation type, and the reformulated utterance).
All types are immutable after construction and safe to share across threads.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable, Iterator

from .errors import CorpusSchemaError


class ReformulationType(Enum):
    """How a user utterance relates to the utterance it replaces."""

    START_RESTART = "start_restart"
    REPEAT = "repeat"
    REPHRASE = "rephrase"
    SIMPLIFY = "simplify"
    REFINE = "refine"
    CHANGE = "change"
    STOP = "stop"

    @classmethod
    def from_string(cls, raw: str) -> "ReformulationType":
        try:
            return cls(raw)
        except ValueError:
            raise ValueError(f"unknown reformulation type {raw!r}") from None

    def __str__(self) -> str:
        return self.value


#: Canonical index order used by transition matrices and distributions.
TYPE_ORDER: tuple[ReformulationType, ...] = tuple(ReformulationType)

#: Types a simulated user is allowed to produce.  ``change`` and ``stop``
#: alter the underlying intent and are excluded from generation.
GENERABLE_TYPES: frozenset[ReformulationType] = frozenset(
    {
        ReformulationType.REPHRASE,
        ReformulationType.SIMPLIFY,
        ReformulationType.REFINE,
        ReformulationType.REPEAT,
        ReformulationType.START_RESTART,
    }
)


class Speaker(Enum):
    USER = "user"
    AGENT = "agent"


class Intent(Enum):
    """User and agent intents observed on annotated exchanges."""

    # user side
    DISCLOSE = "disclose"
    NON_DISCLOSE = "non_disclose"
    REVISE = "revise"
    REFINE = "refine"
    EXPAND = "expand"
    INQUIRE_LIST = "inquire_list"
    INQUIRE_COMPARE = "inquire_compare"
    INQUIRE_SUBSET = "inquire_subset"
    INQUIRE_SIMILAR = "inquire_similar"
    NAVIGATE_REPEAT = "navigate_repeat"
    NAVIGATE_BACK = "navigate_back"
    NAVIGATE_MORE = "navigate_more"
    NAVIGATE_NOTE = "navigate_note"
    NAVIGATE_COMPLETE = "navigate_complete"
    INTERRUPT = "interrupt"
    INTERROGATE = "interrogate"
    # agent side
    FAILED = "failed"
    SUGGEST = "suggest"
    ELICIT = "elicit"
    EXTRACT = "extract"
    LIST = "list"
    SIMILAR = "similar"
    REPEAT = "repeat"
    END_DISCLOSE = "end_disclose"
    CLARIFY = "clarify"

    @classmethod
    def from_string(cls, raw: str) -> "Intent":
        try:
            return cls(raw)
        except ValueError:
            raise ValueError(f"unknown intent {raw!r}") from None

    def __str__(self) -> str:
        return self.value


#: Intents produced by the agent side (``non_disclose`` occurs on both sides).
AGENT_INTENTS: frozenset[Intent] = frozenset(
    {
        Intent.FAILED,
        Intent.SUGGEST,
        Intent.ELICIT,
        Intent.EXTRACT,
        Intent.LIST,
        Intent.SIMILAR,
        Intent.REPEAT,
        Intent.NON_DISCLOSE,
        Intent.END_DISCLOSE,
        Intent.CLARIFY,
    }
)

SLOT_KINDS = frozenset({"movie", "location", "restaurant", "hotel", "song", "musician", "genre"})
DOMAINS = frozenset({"movie", "travel", "music", "hybrid"})
TRIAD_SOURCES = frozenset({"logged", "crowdsourced"})


@dataclass(frozen=True, slots=True)
class SlotAnnotation:
    """A typed value span mentioned in an utterance."""

    slot_kind: str
    value: str

    def __post_init__(self) -> None:
        if self.slot_kind not in SLOT_KINDS:
            raise ValueError(f"unknown slot kind {self.slot_kind!r}")
        if not self.value.strip():
            raise ValueError("slot value must be non-empty")


@dataclass(frozen=True, slots=True)
class Turn:
    """One exchange-level utterance with optional annotations."""

    index: int
    speaker: Speaker
    utterance: str
    intent: Intent | None = None
    slots: tuple[SlotAnnotation, ...] = ()
    reformulation: ReformulationType | None = None

    def __post_init__(self) -> None:
        if not self.utterance.strip():
            raise ValueError("utterance must be non-empty")
        if self.speaker is Speaker.AGENT and self.reformulation is not None:
            raise ValueError("agent turns cannot carry a reformulation label")
        object.__setattr__(self, "slots", tuple(self.slots))

    @property
    def is_user(self) -> bool:
        return self.speaker is Speaker.USER


@dataclass(frozen=True, slots=True)
class UserProfile:
    age_band: str | None = None
    gender: str | None = None
    education: str | None = None
    has_cra_experience: bool | None = None


@dataclass(frozen=True, slots=True)
class Dialogue:
    """An ordered conversation between one user and one agent."""

    dialogue_id: str
    agent_id: str
    domain: str
    turns: tuple[Turn, ...]
    user_profile: UserProfile | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "turns", tuple(self.turns))
        if self.domain not in DOMAINS:
            raise ValueError(f"unknown domain {self.domain!r}")
        for position, turn in enumerate(self.turns):
            if turn.index != position:
                raise ValueError(
                    f"turn indices must be contiguous from 0; got {turn.index} at position {position}"
                )
        if not any(t.is_user for t in self.turns):
            raise ValueError("dialogue must contain at least one user turn")

    def user_turns(self) -> Iterator[Turn]:
        return (t for t in self.turns if t.is_user)


@dataclass(frozen=True, slots=True)
class Triad:
    """An original utterance, a reformulation type, and the rewritten utterance."""

    original: str
    reformulation_type: ReformulationType
    reformulated: str
    domain: str
    source: str = "logged"

    def __post_init__(self) -> None:
        if not self.original.strip() or not self.reformulated.strip():
            raise ValueError("triad utterances must be non-empty")
        if self.domain not in DOMAINS:
            raise ValueError(f"unknown domain {self.domain!r}")
        if self.source not in TRIAD_SOURCES:
            raise ValueError(f"unknown triad source {self.source!r}")

    @property
    def generable(self) -> bool:
        return self.reformulation_type in GENERABLE_TYPES


@dataclass(frozen=True, slots=True)
class Corpus:
    dialogues: tuple[Dialogue, ...] = ()
    triads: tuple[Triad, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "dialogues", tuple(self.dialogues))
        object.__setattr__(self, "triads", tuple(self.triads))
        seen: set[str] = set()
        for d in self.dialogues:
            if d.dialogue_id in seen:
                raise ValueError(f"duplicate dialogue_id {d.dialogue_id!r}")
            seen.add(d.dialogue_id)


# ---------------------------------------------------------------------------
# persistence


def _require(obj: dict, key: str, line: int) -> object:
    if key not in obj:
        raise CorpusSchemaError("missing required field", line=line, field=key)
    return obj[key]


def _parse_slot(obj: object, line: int) -> SlotAnnotation:
    if not isinstance(obj, dict):
        raise CorpusSchemaError("slot must be an object", line=line, field="slots")
    try:
        return SlotAnnotation(str(_require(obj, "slot_kind", line)), str(_require(obj, "value", line)))
    except ValueError as exc:
        raise CorpusSchemaError(str(exc), line=line, field="slots") from None


def _parse_turn(obj: object, index: int, line: int) -> Turn:
    if not isinstance(obj, dict):
        raise CorpusSchemaError("turn must be an object", line=line, field="turns")
    raw_speaker = str(_require(obj, "speaker", line))
    try:
        speaker = Speaker(raw_speaker)
    except ValueError:
        raise CorpusSchemaError(f"unknown speaker {raw_speaker!r}", line=line, field="speaker") from None
    utterance = str(_require(obj, "utterance", line))
    intent = None
    if obj.get("intent") is not None:
        try:
            intent = Intent.from_string(str(obj["intent"]))
        except ValueError as exc:
            raise CorpusSchemaError(str(exc), line=line, field="intent") from None
    slots = tuple(_parse_slot(s, line) for s in obj.get("slots", []) or [])
    reformulation = None
    if obj.get("reformulation") is not None:
        try:
            reformulation = ReformulationType.from_string(str(obj["reformulation"]))
        except ValueError as exc:
            raise CorpusSchemaError(str(exc), line=line, field="reformulation") from None
    try:
        return Turn(
            index=index,
            speaker=speaker,
            utterance=utterance,
            intent=intent,
            slots=slots,
            reformulation=reformulation,
        )
    except ValueError as exc:
        raise CorpusSchemaError(str(exc), line=line, field="turns") from None


def _parse_profile(obj: object, line: int) -> UserProfile:
    if not isinstance(obj, dict):
        raise CorpusSchemaError("user_profile must be an object", line=line, field="user_profile")
    raw_flag = obj.get("has_cra_experience")
    if raw_flag is not None and not isinstance(raw_flag, bool):
        raise CorpusSchemaError("has_cra_experience must be a boolean", line=line, field="user_profile")
    return UserProfile(
        age_band=obj.get("age_band"),
        gender=obj.get("gender"),
        education=obj.get("education"),
        has_cra_experience=raw_flag,
    )


def _parse_dialogue(obj: dict, line: int) -> Dialogue:
    turns = _require(obj, "turns", line)
    if not isinstance(turns, list):
        raise CorpusSchemaError("turns must be a list", line=line, field="turns")
    profile = None
    if obj.get("user_profile") is not None:
        profile = _parse_profile(obj["user_profile"], line)
    try:
        return Dialogue(
            dialogue_id=str(_require(obj, "dialogue_id", line)),
            agent_id=str(_require(obj, "agent_id", line)),
            domain=str(_require(obj, "domain", line)),
            turns=tuple(_parse_turn(t, i, line) for i, t in enumerate(turns)),
            user_profile=profile,
        )
    except ValueError as exc:
        raise CorpusSchemaError(str(exc), line=line, field="dialogue") from None


def _parse_triad(obj: dict, line: int) -> Triad:
    try:
        return Triad(
            original=str(_require(obj, "original", line)),
            reformulation_type=ReformulationType.from_string(str(_require(obj, "type", line))),
            reformulated=str(_require(obj, "reformulated", line)),
            domain=str(_require(obj, "domain", line)),
            source=str(obj.get("source", "logged")),
        )
    except ValueError as exc:
        raise CorpusSchemaError(str(exc), line=line, field="triad") from None


def load_corpus(path: str | Path) -> Corpus:
    """Load and validate a line-delimited corpus file.

    Raises :class:`CorpusSchemaError` carrying the offending line number and
    field for malformed records; unknown enum strings are rejected.
    """
    dialogues: list[Dialogue] = []
    triads: list[Triad] = []
    with open(path, encoding="utf-8") as handle:
        for line_no, raw in enumerate(handle, start=1):
            raw = raw.strip()
            if not raw:
                continue
            try:
                obj = json.loads(raw)
            except json.JSONDecodeError as exc:
                raise CorpusSchemaError(f"invalid JSON: {exc.msg}", line=line_no) from None
            if not isinstance(obj, dict):
                raise CorpusSchemaError("record must be a JSON object", line=line_no)
            kind = obj.get("kind")
            if kind == "dialogue":
                dialogues.append(_parse_dialogue(obj, line_no))
            elif kind == "triad":
                triads.append(_parse_triad(obj, line_no))
            else:
                raise CorpusSchemaError(f"unknown record kind {kind!r}", line=line_no, field="kind")
    try:
        return Corpus(dialogues=tuple(dialogues), triads=tuple(triads))
    except ValueError as exc:
        raise CorpusSchemaError(str(exc)) from None


def dialogue_to_record(dialogue: Dialogue) -> dict:
    record: dict = {
        "kind": "dialogue",
        "dialogue_id": dialogue.dialogue_id,
        "agent_id": dialogue.agent_id,
        "domain": dialogue.domain,
        "turns": [],
    }
    for turn in dialogue.turns:
        t: dict = {"speaker": turn.speaker.value, "utterance": turn.utterance}
        if turn.intent is not None:
            t["intent"] = turn.intent.value
        if turn.slots:
            t["slots"] = [{"slot_kind": s.slot_kind, "value": s.value} for s in turn.slots]
        if turn.reformulation is not None:
            t["reformulation"] = turn.reformulation.value
        record["turns"].append(t)
    if dialogue.user_profile is not None:
        p = dialogue.user_profile
        record["user_profile"] = {
            k: v
            for k, v in {
                "age_band": p.age_band,
                "gender": p.gender,
                "education": p.education,
                "has_cra_experience": p.has_cra_experience,
            }.items()
            if v is not None
        }
    return record


def triad_to_record(triad: Triad) -> dict:
    return {
        "kind": "triad",
        "original": triad.original,
        "type": triad.reformulation_type.value,
        "reformulated": triad.reformulated,
        "domain": triad.domain,
        "source": triad.source,
    }


def save_corpus(corpus: Corpus, path: str | Path) -> None:
    """Write a corpus so that :func:`load_corpus` round-trips it structurally."""
    with open(path, "w", encoding="utf-8") as handle:
        for dialogue in corpus.dialogues:
            handle.write(json.dumps(dialogue_to_record(dialogue), ensure_ascii=False) + "\n")
        for triad in corpus.triads:
            handle.write(json.dumps(triad_to_record(triad), ensure_ascii=False) + "\n")


# ---------------------------------------------------------------------------
# extraction


def _slot_key(slots: Iterable[SlotAnnotation]) -> tuple[tuple[str, str], ...]:
    return tuple(sorted((s.slot_kind, s.value) for s in slots))


def labeled_runs(dialogue: Dialogue) -> list[list[Turn]]:
    """Maximal runs of consecutive reformulation-labeled user turns that share
    intent and slot multiset.

    Agent turns in between do not break a run; an unlabeled user turn or a
    change of intent/slots does.  Restart labels continue a run as long as
    intent and slots are unchanged.
    """
    runs: list[list[Turn]] = []
    current: list[Turn] = []
    current_key: tuple | None = None
    for turn in dialogue.turns:
        if not turn.is_user:
            continue
        if turn.reformulation is None:
            if current:
                runs.append(current)
            current, current_key = [], None
            continue
        key = (turn.intent, _slot_key(turn.slots))
        if current and key == current_key:
            current.append(turn)
        else:
            if current:
                runs.append(current)
            current, current_key = [turn], key
    if current:
        runs.append(current)
    return runs


def _nearest_preceding_user(dialogue: Dialogue, index: int) -> Turn | None:
    for turn in reversed(dialogue.turns[:index]):
        if turn.is_user:
            return turn
    return None


@dataclass(frozen=True, slots=True)
class TriadExtraction:
    """Triads recovered from labeled dialogues plus a skip counter for
    labeled turns that had no preceding user utterance."""

    triads: tuple[Triad, ...]
    skipped: int

    def __iter__(self) -> Iterator[Triad]:
        return iter(self.triads)

    def __len__(self) -> int:
        return len(self.triads)


def extract_triads(corpus: Corpus) -> TriadExtraction:
    """Pair every labeled user turn with the nearest preceding user utterance.

    Triads of type ``change``/``stop`` are emitted too; callers needing
    training data filter on :attr:`Triad.generable`.
    """
    triads: list[Triad] = []
    skipped = 0
    for dialogue in corpus.dialogues:
        for turn in dialogue.turns:
            if not turn.is_user or turn.reformulation is None:
                continue
            antecedent = _nearest_preceding_user(dialogue, turn.index)
            if antecedent is None:
                skipped += 1
                continue
            triads.append(
                Triad(
                    original=antecedent.utterance,
                    reformulation_type=turn.reformulation,
                    reformulated=turn.utterance,
                    domain=dialogue.domain,
                    source="logged",
                )
            )
    return TriadExtraction(triads=tuple(triads), skipped=skipped)


@dataclass(frozen=True, slots=True)
class HumanSequence:
    """A seed utterance and the reformulations a user produced for it."""

    dialogue_id: str
    seed: str
    steps: tuple[tuple[ReformulationType, str], ...]
    turn_indices: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.steps)

    @property
    def types(self) -> tuple[ReformulationType, ...]:
        return tuple(t for t, _ in self.steps)


def extract_human_sequences(corpus: Corpus) -> list[HumanSequence]:
    """Group consecutive labeled user turns sharing intent and slots into
    reformulation sequences, seeded by the nearest preceding user utterance.

    Runs whose first labeled turn has no preceding user utterance are dropped
    (there is nothing to reformulate).
    """
    sequences: list[HumanSequence] = []
    for dialogue in corpus.dialogues:
        for run in labeled_runs(dialogue):
            antecedent = _nearest_preceding_user(dialogue, run[0].index)
            if antecedent is None:
                continue
            sequences.append(
                HumanSequence(
                    dialogue_id=dialogue.dialogue_id,
                    seed=antecedent.utterance,
                    steps=tuple((t.reformulation, t.utterance) for t in run),
                    turn_indices=tuple(t.index for t in run),
                )
            )
    return sequences
