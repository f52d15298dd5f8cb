"""Dialogue-piece segmentation, transition-matrix estimation, and type sampling.

The transition matrix is row-stochastic with ``entries[i][j]`` equal to the
probability that type ``j`` follows type ``i`` in consecutive reformulations
within one dialogue piece.  Probabilities are maximum-likelihood estimates,
i.e. row-normalized adjacent-pair counts.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .dialogue import (
    GENERABLE_TYPES,
    TYPE_ORDER,
    Corpus,
    Intent,
    ReformulationType,
    SlotAnnotation,
    labeled_runs,
)
from .errors import DegenerateDistributionError, NoTransitionsError

SIMPLEX_TOL = 1e-9
_TYPE_INDEX = {t: i for i, t in enumerate(TYPE_ORDER)}

#: Types excluded from generation-time sampling by default.
DEFAULT_FORBIDDEN: frozenset[ReformulationType] = frozenset(
    {ReformulationType.CHANGE, ReformulationType.STOP}
)


@dataclass(frozen=True, slots=True)
class DialoguePiece:
    """A maximal run of labeled user turns sharing intent and slots."""

    dialogue_id: str
    intent: Intent | None
    slots: tuple[SlotAnnotation, ...]
    typed_states: tuple[ReformulationType, ...]
    turn_indices: tuple[int, ...]

    def __post_init__(self) -> None:
        if not self.typed_states:
            raise ValueError("a dialogue piece needs at least one typed state")
        if len(self.typed_states) != len(self.turn_indices):
            raise ValueError("typed_states and turn_indices must align")


def segment_pieces(corpus: Corpus) -> list[DialoguePiece]:
    """Split dialogues into pieces; a change of intent or slots starts a new one."""
    pieces: list[DialoguePiece] = []
    for dialogue in corpus.dialogues:
        for run in labeled_runs(dialogue):
            pieces.append(
                DialoguePiece(
                    dialogue_id=dialogue.dialogue_id,
                    intent=run[0].intent,
                    slots=run[0].slots,
                    typed_states=tuple(t.reformulation for t in run),
                    turn_indices=tuple(t.index for t in run),
                )
            )
    return pieces


@dataclass(frozen=True, slots=True)
class TransitionMatrix:
    """Row-stochastic type-transition probabilities with their raw counts."""

    types: tuple[ReformulationType, ...]
    entries: np.ndarray
    counts: np.ndarray

    def __post_init__(self) -> None:
        entries = np.asarray(self.entries, dtype=float)
        counts = np.asarray(self.counts, dtype=np.int64)
        n = len(self.types)
        if entries.shape != (n, n) or counts.shape != (n, n):
            raise ValueError("matrix shape must match the number of types")
        if (counts < 0).any():
            raise ValueError("counts must be non-negative")
        if (entries < -SIMPLEX_TOL).any() or (entries > 1 + SIMPLEX_TOL).any():
            raise ValueError("entries must lie in [0, 1]")
        row_sums = entries.sum(axis=1)
        if not np.allclose(row_sums, 1.0, atol=SIMPLEX_TOL, rtol=0.0):
            raise ValueError("every row must sum to 1")
        count_rows = counts.sum(axis=1)
        for i, total in enumerate(count_rows):
            if total > 0 and not np.allclose(
                entries[i], counts[i] / total, atol=SIMPLEX_TOL, rtol=0.0
            ):
                raise ValueError(f"row {i} entries are not the normalized counts")
        entries.setflags(write=False)
        counts.setflags(write=False)
        object.__setattr__(self, "entries", entries)
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "types", tuple(self.types))

    def index(self, t: ReformulationType) -> int:
        return self.types.index(t)

    @property
    def fallback_rows(self) -> tuple[ReformulationType, ...]:
        """Types never observed as a predecessor; their rows carry the
        uniform fallback distribution over generable types."""
        totals = self.counts.sum(axis=1)
        return tuple(t for t, total in zip(self.types, totals) if total == 0)

    def row(self, t: ReformulationType) -> np.ndarray:
        return self.entries[self.index(t)]

    def to_record(self) -> dict:
        return {
            "types": [t.value for t in self.types],
            "entries": [[float(v) for v in row] for row in self.entries],
            "counts": [[int(v) for v in row] for row in self.counts],
        }

    @classmethod
    def from_record(cls, record: dict) -> "TransitionMatrix":
        types = tuple(ReformulationType.from_string(s) for s in record["types"])
        if types != TYPE_ORDER:
            raise ValueError("matrix types must be the canonical order")
        return cls(
            types=types,
            entries=np.array(record["entries"], dtype=float),
            counts=np.array(record["counts"], dtype=np.int64),
        )


def _uniform_generable_row() -> np.ndarray:
    row = np.zeros(len(TYPE_ORDER))
    for t in GENERABLE_TYPES:
        row[_TYPE_INDEX[t]] = 1.0 / len(GENERABLE_TYPES)
    return row


def estimate_transition_matrix(pieces: list[DialoguePiece]) -> TransitionMatrix:
    """Count adjacent type pairs across pieces and row-normalize.

    Rows of types never observed as a predecessor fall back to the uniform
    distribution over generable types (flagged via ``fallback_rows``), which
    avoids absorbing dead states on small corpora.
    """
    n = len(TYPE_ORDER)
    counts = np.zeros((n, n), dtype=np.int64)
    for piece in pieces:
        states = piece.typed_states
        for prev, cur in zip(states, states[1:]):
            counts[_TYPE_INDEX[prev], _TYPE_INDEX[cur]] += 1
    if counts.sum() == 0:
        raise NoTransitionsError("no transitions observed")
    entries = np.zeros((n, n))
    for i in range(n):
        total = counts[i].sum()
        entries[i] = counts[i] / total if total > 0 else _uniform_generable_row()
    return TransitionMatrix(types=TYPE_ORDER, entries=entries, counts=counts)


def save_matrix(matrix: TransitionMatrix, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(json.dumps(matrix.to_record()) + "\n")


def load_matrix(path: str | Path) -> TransitionMatrix:
    with open(path, encoding="utf-8") as handle:
        return TransitionMatrix.from_record(json.loads(handle.read()))


@dataclass(frozen=True, slots=True)
class TypeDistribution:
    """Probability distribution over reformulation types at one step."""

    types: tuple[ReformulationType, ...]
    probs: np.ndarray
    step: int = 1

    def __post_init__(self) -> None:
        probs = np.asarray(self.probs, dtype=float)
        if probs.shape != (len(self.types),):
            raise ValueError("probs must have one entry per type")
        if (probs < -SIMPLEX_TOL).any():
            raise ValueError("probabilities must be non-negative")
        if abs(probs.sum() - 1.0) > SIMPLEX_TOL:
            raise ValueError("probabilities must sum to 1")
        if self.step < 0:
            raise ValueError("step must be non-negative")
        probs.setflags(write=False)
        object.__setattr__(self, "probs", probs)
        object.__setattr__(self, "types", tuple(self.types))

    def prob(self, t: ReformulationType) -> float:
        return float(self.probs[self.types.index(t)])


def uniform_generable_distribution(step: int = 1) -> TypeDistribution:
    """The initial distribution: uniform over the five generable types."""
    return TypeDistribution(types=TYPE_ORDER, probs=_uniform_generable_row(), step=step)


def one_hot_distribution(t: ReformulationType, step: int = 1) -> TypeDistribution:
    probs = np.zeros(len(TYPE_ORDER))
    probs[_TYPE_INDEX[t]] = 1.0
    return TypeDistribution(types=TYPE_ORDER, probs=probs, step=step)


def update_distribution(matrix: TransitionMatrix, z: TypeDistribution) -> TypeDistribution:
    """Propagate a type distribution one step along the transition matrix.

    Mass flows along ``entries[i][j] = p(next=j | current=i)``, i.e.
    ``probs'[j] = sum_i probs[i] * entries[i][j]``.
    """
    if z.types != matrix.types:
        raise ValueError("distribution and matrix type orders do not match")
    probs = z.probs @ matrix.entries
    return TypeDistribution(types=matrix.types, probs=probs, step=z.step + 1)


def sample_type(
    z: TypeDistribution,
    rng: random.Random | int,
    forbidden: frozenset[ReformulationType] = DEFAULT_FORBIDDEN,
    max_retries: int = 10,
) -> ReformulationType:
    """Draw a type from ``z``, rejecting forbidden types.

    Forbidden draws are retried up to ``max_retries`` times; on exhaustion the
    distribution is renormalized over the allowed types and sampled once more.
    Deterministic given the seeded random source.
    """
    if isinstance(rng, int):
        rng = random.Random(rng)
    unknown = forbidden - set(z.types)
    if unknown:
        raise ValueError(f"forbidden types not in distribution: {sorted(t.value for t in unknown)}")

    def draw(probs: np.ndarray) -> ReformulationType:
        x = rng.random() * probs.sum()
        acc = 0.0
        for t, p in zip(z.types, probs):
            acc += p
            if x < acc:
                return t
        return z.types[int(np.flatnonzero(probs > 0)[-1])]

    for _ in range(max_retries + 1):
        candidate = draw(z.probs)
        if candidate not in forbidden:
            return candidate
    allowed = np.array([0.0 if t in forbidden else p for t, p in zip(z.types, z.probs)])
    if allowed.sum() <= 0.0:
        raise DegenerateDistributionError("degenerate distribution: no allowed type has mass")
    return draw(allowed)
