"""The reformulation-sequence loop and dialogue splicing.

One sequence is produced by repeating: sample a type from the current
distribution (rejecting change/stop), generate a candidate conditioned on the
latest utterance and the sampled type, filter it, and propagate the type
distribution through the transition matrix.  Rejected steps fall back to a
verbatim repeat so a sequence always completes.
"""

from __future__ import annotations

import dataclasses
import json
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

from .dialogue import (
    Dialogue,
    ReformulationType,
    SlotAnnotation,
    Turn,
    labeled_runs,
)
from .dynamics import (
    DEFAULT_FORBIDDEN,
    TransitionMatrix,
    TypeDistribution,
    one_hot_distribution,
    sample_type,
    uniform_generable_distribution,
    update_distribution,
)
from .errors import BackendError, SpliceMismatchError
from .filtering import AcceptabilityVerdict, heuristic_acceptable, readability_grade
from .generators import GenerationBackend, GenerationRequest, generate
from .text import data_version

FilterFn = Callable[[str, str, ReformulationType], AcceptabilityVerdict]

FILTER_MODES = ("heuristic", "remote", "off")
CONDITION_MODES = ("previous", "seed")
PROPAGATE_MODES = ("realized", "marginal")


@dataclass(frozen=True, slots=True)
class OrchestratorConfig:
    """Knobs for one sequence-generation run."""

    length: int = 3
    max_generation_attempts: int = 5
    forbidden: frozenset[ReformulationType] = DEFAULT_FORBIDDEN
    filter_mode: str = "heuristic"
    filter_relaxed: bool = False
    condition_on: str = "previous"
    propagate: str = "realized"
    num_candidates: int = 1
    domain: str = "movie"
    slots: tuple[SlotAnnotation, ...] = ()
    seed: int = 0
    initial: TypeDistribution | None = None

    def __post_init__(self) -> None:
        if self.length < 1:
            raise ValueError("length must be at least 1")
        if self.max_generation_attempts < 1:
            raise ValueError("max_generation_attempts must be at least 1")
        if self.filter_mode not in FILTER_MODES:
            raise ValueError(f"filter_mode must be one of {FILTER_MODES}")
        if self.condition_on not in CONDITION_MODES:
            raise ValueError(f"condition_on must be one of {CONDITION_MODES}")
        if self.propagate not in PROPAGATE_MODES:
            raise ValueError(f"propagate must be one of {PROPAGATE_MODES}")
        object.__setattr__(self, "forbidden", frozenset(self.forbidden))
        object.__setattr__(self, "slots", tuple(self.slots))

    def snapshot(self, backend_id: str) -> dict:
        """JSON-serializable record of everything that determines the output."""
        return {
            "length": self.length,
            "max_generation_attempts": self.max_generation_attempts,
            "forbidden": sorted(t.value for t in self.forbidden),
            "filter_mode": self.filter_mode,
            "filter_relaxed": self.filter_relaxed,
            "condition_on": self.condition_on,
            "propagate": self.propagate,
            "num_candidates": self.num_candidates,
            "domain": self.domain,
            "seed": self.seed,
            "backend": backend_id,
            "data_version": data_version(),
        }


@dataclass(frozen=True, slots=True)
class SequenceStep:
    type: ReformulationType
    utterance: str
    verdict: AcceptabilityVerdict | None
    attempts_used: int
    fallback: bool = False


@dataclass(frozen=True, slots=True)
class ReformulationSequence:
    """A seed utterance and the generated reformulations for it."""

    seed: str
    steps: tuple[SequenceStep, ...]
    config: dict = field(default_factory=dict)
    terminated: str | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "steps", tuple(self.steps))

    @property
    def types(self) -> tuple[ReformulationType, ...]:
        return tuple(step.type for step in self.steps)

    def to_record(self) -> dict:
        return {
            "seed": self.seed,
            "steps": [
                {"type": s.type.value, "utterance": s.utterance, "fallback": s.fallback}
                for s in self.steps
            ],
            "config": self.config,
            **({"terminated": self.terminated} if self.terminated else {}),
        }

    @classmethod
    def from_record(cls, record: dict) -> "ReformulationSequence":
        steps = tuple(
            SequenceStep(
                type=ReformulationType.from_string(s["type"]),
                utterance=s["utterance"],
                verdict=None,
                attempts_used=0,
                fallback=bool(s.get("fallback", False)),
            )
            for s in record["steps"]
        )
        return cls(
            seed=record["seed"],
            steps=steps,
            config=record.get("config", {}),
            terminated=record.get("terminated"),
        )


def _request_seed(base: int, step: int, attempt: int) -> int:
    return (base * 1_000_003 + step * 101 + attempt) % (2**63)


def _fallback_verdict(utterance: str) -> AcceptabilityVerdict:
    # a verbatim repeat of the previous utterance is accepted by definition
    return AcceptabilityVerdict(
        acceptable=True,
        reasons=(),
        readability_grade=readability_grade(utterance),
        backend_id="heuristic",
    )


def generate_sequence(
    u0: str,
    matrix: TransitionMatrix,
    cfg: OrchestratorConfig,
    backend: GenerationBackend,
    filter_fn: FilterFn | None = None,
) -> ReformulationSequence:
    """Generate one reformulation sequence from a seed utterance.

    Deterministic given the config seed, the matrix, and the data-file
    version.  A hard backend failure terminates early with the partial
    sequence and a recorded reason.
    """
    if not u0.strip():
        raise ValueError("seed utterance must be non-empty")
    if filter_fn is None and cfg.filter_mode == "heuristic":
        filter_fn = lambda cand, orig, t: heuristic_acceptable(
            cand, orig, t, relaxed=cfg.filter_relaxed
        )
    filtering_on = cfg.filter_mode != "off" and filter_fn is not None

    rng = random.Random(cfg.seed)
    z = cfg.initial if cfg.initial is not None else uniform_generable_distribution(step=1)
    previous = u0
    steps: list[SequenceStep] = []
    terminated: str | None = None
    backend_id = getattr(backend, "backend_id", "unknown")

    for step_index in range(1, cfg.length + 1):
        sampled = sample_type(z, rng, forbidden=cfg.forbidden)
        conditioning = previous if cfg.condition_on == "previous" else u0
        accepted: tuple[str, AcceptabilityVerdict | None] | None = None
        attempts = 0
        try:
            for attempt in range(cfg.max_generation_attempts):
                attempts = attempt + 1
                request = GenerationRequest(
                    utterance=conditioning,
                    target_type=sampled,
                    domain=cfg.domain,
                    slots=cfg.slots,
                    num_candidates=cfg.num_candidates,
                    seed=_request_seed(cfg.seed, step_index, attempt),
                )
                for candidate in generate(request, backend):
                    if not filtering_on:
                        accepted = (candidate.text, None)
                        break
                    verdict = filter_fn(candidate.text, conditioning, sampled)
                    if verdict.acceptable:
                        accepted = (candidate.text, verdict)
                        break
                if accepted is not None:
                    break
        except BackendError:
            terminated = "backend-failure"
            break

        if accepted is not None:
            utterance, verdict = accepted
            realized = sampled
            steps.append(
                SequenceStep(
                    type=realized,
                    utterance=utterance,
                    verdict=verdict,
                    attempts_used=attempts,
                    fallback=False,
                )
            )
            previous = utterance
        else:
            realized = ReformulationType.REPEAT
            verdict = _fallback_verdict(previous) if filtering_on else None
            steps.append(
                SequenceStep(
                    type=realized,
                    utterance=previous,
                    verdict=verdict,
                    attempts_used=attempts,
                    fallback=True,
                )
            )
        if cfg.propagate == "realized":
            z = update_distribution(matrix, one_hot_distribution(realized, step=z.step))
        else:
            z = update_distribution(matrix, z)

    return ReformulationSequence(
        seed=u0,
        steps=tuple(steps),
        config=cfg.snapshot(backend_id),
        terminated=terminated,
    )


def save_sequences(sequences: Sequence[ReformulationSequence], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        for sequence in sequences:
            handle.write(json.dumps(sequence.to_record(), ensure_ascii=False, sort_keys=True))
            handle.write("\n")


def load_sequences(path: str | Path) -> list[ReformulationSequence]:
    sequences = []
    with open(path, encoding="utf-8") as handle:
        for line in handle:
            line = line.strip()
            if line:
                sequences.append(ReformulationSequence.from_record(json.loads(line)))
    return sequences


def splice_dialogue(dialogue: Dialogue, simulated: ReformulationSequence) -> Dialogue:
    """Replace a human reformulation sequence with simulated utterances.

    The simulated type sequence must match a human run in the dialogue; agent
    turns and all annotations are untouched and the input dialogue is not
    modified.
    """
    sim_types = list(simulated.types)
    target: list[Turn] | None = None
    available: list[list[ReformulationType]] = []
    for run in labeled_runs(dialogue):
        run_types = [t.reformulation for t in run]
        available.append(run_types)
        if run_types == sim_types and target is None:
            target = run
    if target is None:
        raise SpliceMismatchError(
            "no human sequence matches the simulated types "
            f"{[t.value for t in sim_types]}; dialogue has "
            f"{[[t.value for t in types] for types in available]}"
        )
    replacement = {
        turn.index: step.utterance for turn, step in zip(target, simulated.steps)
    }
    new_turns = tuple(
        dataclasses.replace(turn, utterance=replacement[turn.index])
        if turn.index in replacement
        else turn
        for turn in dialogue.turns
    )
    return dataclasses.replace(dialogue, turns=new_turns)
