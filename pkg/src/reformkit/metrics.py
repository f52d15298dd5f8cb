"""Text-overlap metrics and the repeated-run evaluation protocol.

ROUGE-1/2/L and BLEU are implemented from scratch over the shared tokenizer.
Evaluation micro-averages per-step candidate/reference pairs within each
sequence across repeated runs, then means across sequences.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import NamedTuple, Sequence

from .dialogue import HumanSequence, ReformulationType
from .errors import AlignmentError, DataError
from .text import content_tokens, tokenize

__all__ = [
    "tokenize",
    "RougeScore",
    "rouge_n",
    "rouge_l",
    "bleu",
    "MetricReport",
    "evaluate_run",
    "ClassifierThresholds",
    "classify_reformulation_type",
]


class RougeScore(NamedTuple):
    precision: float
    recall: float
    f1: float


def _ngrams(tokens: Sequence[str], n: int) -> list[tuple[str, ...]]:
    return [tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1)]


def _f1(precision: float, recall: float) -> float:
    if precision + recall == 0.0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


def rouge_n(candidate: str, reference: str, n: int) -> RougeScore:
    """N-gram multiset overlap between a candidate and a reference.

    When neither side has any n-gram of the requested order (inputs shorter
    than ``n``), the score is defined as a full match so that a string always
    scores 1.0 against itself.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    ref_tokens = tokenize(reference)
    if not ref_tokens:
        raise DataError("reference must be non-empty after tokenization")
    cand_tokens = tokenize(candidate)
    cand_grams = Counter(_ngrams(cand_tokens, n))
    ref_grams = Counter(_ngrams(ref_tokens, n))
    if not cand_grams and not ref_grams:
        return RougeScore(1.0, 1.0, 1.0)
    if not cand_grams or not ref_grams:
        return RougeScore(0.0, 0.0, 0.0)
    overlap = sum(min(count, ref_grams[gram]) for gram, count in cand_grams.items())
    precision = overlap / sum(cand_grams.values())
    recall = overlap / sum(ref_grams.values())
    return RougeScore(precision, recall, _f1(precision, recall))


def _lcs_length(a: Sequence[str], b: Sequence[str]) -> int:
    if not a or not b:
        return 0
    previous = [0] * (len(b) + 1)
    for token_a in a:
        current = [0]
        for j, token_b in enumerate(b, start=1):
            if token_a == token_b:
                current.append(previous[j - 1] + 1)
            else:
                current.append(max(previous[j], current[j - 1]))
        previous = current
    return previous[-1]


def rouge_l(candidate: str, reference: str) -> RougeScore:
    """Longest-common-subsequence overlap between candidate and reference."""
    ref_tokens = tokenize(reference)
    if not ref_tokens:
        raise DataError("reference must be non-empty after tokenization")
    cand_tokens = tokenize(candidate)
    if not cand_tokens:
        return RougeScore(0.0, 0.0, 0.0)
    lcs = _lcs_length(cand_tokens, ref_tokens)
    precision = lcs / len(cand_tokens)
    recall = lcs / len(ref_tokens)
    return RougeScore(precision, recall, _f1(precision, recall))


def bleu(candidate: str, reference: str, max_n: int = 4) -> float:
    """Geometric mean of clipped n-gram precisions with a brevity penalty.

    Orders without any matching n-gram are excluded from the geometric mean
    (short-sentence handling); a candidate with no overlap at all scores 0.
    Values lie in [0, 1]; multiply by 100 for display if preferred.
    """
    ref_tokens = tokenize(reference)
    if not ref_tokens:
        raise DataError("reference must be non-empty after tokenization")
    cand_tokens = tokenize(candidate)
    if not cand_tokens:
        return 0.0
    log_precisions: list[float] = []
    for n in range(1, max_n + 1):
        cand_grams = _ngrams(cand_tokens, n)
        if not cand_grams:
            continue
        ref_counts = Counter(_ngrams(ref_tokens, n))
        clipped = sum(
            min(count, ref_counts[gram]) for gram, count in Counter(cand_grams).items()
        )
        if clipped == 0:
            continue
        log_precisions.append(math.log(clipped / len(cand_grams)))
    if not log_precisions:
        return 0.0
    brevity = min(1.0, math.exp(1.0 - len(ref_tokens) / len(cand_tokens)))
    return brevity * math.exp(sum(log_precisions) / len(log_precisions))


@dataclass(frozen=True, slots=True)
class MetricReport:
    """Micro-averaged overlap metrics over aligned candidate/reference pairs."""

    rouge1: float
    rouge2: float
    rougeL: float
    bleu: float
    n_pairs: int
    n_runs: int

    def __post_init__(self) -> None:
        for name in ("rouge1", "rouge2", "rougeL", "bleu"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {value}")

    def to_record(self, scale_100: bool = False) -> dict:
        factor = 100.0 if scale_100 else 1.0
        return {
            "rouge1": self.rouge1 * factor,
            "rouge2": self.rouge2 * factor,
            "rougeL": self.rougeL * factor,
            "bleu": self.bleu * factor,
            "n_pairs": self.n_pairs,
            "n_runs": self.n_runs,
        }


def evaluate_run(generated: Sequence, references: Sequence[HumanSequence]) -> MetricReport:
    """Score generated sequences against human reference sequences.

    Sequences align by seed utterance; steps align by index.  Per-step pair
    scores are micro-averaged within each sequence over all runs, then
    averaged across sequences.  Every seed must be generated the same number
    of times (five under the repeated-run protocol).
    """
    if not references:
        raise DataError("no reference sequences given")
    if not generated:
        raise DataError("no generated sequences given")
    refs_by_seed: dict[str, HumanSequence] = {}
    for ref in references:
        refs_by_seed.setdefault(ref.seed, ref)
    runs_per_seed: Counter[str] = Counter()
    pair_scores: dict[str, list[tuple[float, float, float, float]]] = {}
    for sequence in generated:
        seed = sequence.seed
        ref = refs_by_seed.get(seed)
        if ref is None:
            raise AlignmentError(f"no reference sequence for seed {seed!r}")
        runs_per_seed[seed] += 1
        scores = pair_scores.setdefault(seed, [])
        steps = list(sequence.steps)
        for gen_step, (_, ref_utterance) in zip(steps, ref.steps):
            cand = gen_step.utterance
            scores.append(
                (
                    rouge_n(cand, ref_utterance, 1).f1,
                    rouge_n(cand, ref_utterance, 2).f1,
                    rouge_l(cand, ref_utterance).f1,
                    bleu(cand, ref_utterance),
                )
            )
    run_counts = set(runs_per_seed.values())
    if len(run_counts) > 1:
        uneven = min(runs_per_seed, key=lambda s: runs_per_seed[s])
        raise AlignmentError(f"uneven run counts across seeds (e.g. seed {uneven!r})")
    per_sequence = [
        tuple(sum(col) / len(scores) for col in zip(*scores))
        for scores in pair_scores.values()
        if scores
    ]
    if not per_sequence:
        raise DataError("no aligned candidate/reference pairs")
    means = tuple(sum(col) / len(per_sequence) for col in zip(*per_sequence))
    return MetricReport(
        rouge1=means[0],
        rouge2=means[1],
        rougeL=means[2],
        bleu=means[3],
        n_pairs=sum(len(s) for s in pair_scores.values()),
        n_runs=run_counts.pop(),
    )


@dataclass(frozen=True, slots=True)
class ClassifierThresholds:
    """Calibration constants for the surface-form type classifier.

    These are repository calibrations, not values taken from any corpus
    study; adjust per deployment if the generator mix changes.
    """

    simplify_jaccard: float = 0.3
    rephrase_jaccard: float = 0.2
    length_band: float = 0.3


DEFAULT_THRESHOLDS = ClassifierThresholds()


def _jaccard(a: set[str], b: set[str]) -> float:
    union = a | b
    if not union:
        return 0.0
    return len(a & b) / len(union)


def classify_reformulation_type(
    original: str,
    candidate: str,
    thresholds: ClassifierThresholds = DEFAULT_THRESHOLDS,
) -> ReformulationType | None:
    """Best-effort surface classification of how a candidate relates to the
    original utterance; ``None`` when no rule matches.

    Decision cascade: verbatim match, content-superset with additions,
    dominated shrinkage, same-length overlap rewrite, then near-disjoint
    restart.
    """
    orig_tokens = tokenize(original)
    cand_tokens = tokenize(candidate)
    if cand_tokens == orig_tokens:
        return ReformulationType.REPEAT
    orig_content = set(content_tokens(original))
    cand_content = set(content_tokens(candidate))
    if orig_content < cand_content:
        return ReformulationType.REFINE
    orig_set = set(orig_tokens)
    cand_set = set(cand_tokens)
    if len(cand_tokens) < len(orig_tokens) and cand_content and cand_content <= orig_content:
        # a pure deletion (every surviving token came from the original) is a
        # simplification no matter how aggressively it shrank
        if cand_set <= orig_set:
            return ReformulationType.SIMPLIFY
        if _jaccard(cand_content, orig_content) >= thresholds.simplify_jaccard:
            return ReformulationType.SIMPLIFY
    length_delta = abs(len(cand_tokens) - len(orig_tokens))
    band = max(1.0, thresholds.length_band * len(orig_tokens))
    if length_delta <= band and _jaccard(cand_set, orig_set) >= thresholds.rephrase_jaccard:
        return ReformulationType.REPHRASE
    if _jaccard(cand_set, orig_set) < thresholds.rephrase_jaccard:
        return ReformulationType.START_RESTART
    return None
