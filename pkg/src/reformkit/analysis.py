"""Descriptive and inferential statistics over annotated dialogue corpora.

Covers: which agent intents precede reformulations, adjacent type-pair
frequencies, how reformulation types shift over dialogue turns, and whether
users with and without prior assistant experience reformulate differently
(Levene's test for variance homogeneity followed by a t-test).
"""

from __future__ import annotations

import math
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

from scipy import stats as _scipy_stats

from .dialogue import TYPE_ORDER, Corpus, Intent, ReformulationType, Speaker
from .dynamics import SIMPLEX_TOL, DialoguePiece

#: Significance level used to pick pooled vs. Welch t-test from the Levene outcome.
VARIANCE_ALPHA = 0.05


# ---------------------------------------------------------------------------
# reformulation-preceding agent intents


@dataclass(frozen=True, slots=True)
class IntentRatioReport:
    """Fraction of reformulations that immediately follow each agent intent."""

    ratios: dict[Intent, float]
    sigma: dict[Intent, float]
    attributed: int
    excluded: int
    per_agent: dict[str, dict[Intent, float]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        total = sum(self.ratios.values())
        if self.ratios and abs(total - 1.0) > SIMPLEX_TOL:
            raise ValueError(f"intent ratios must sum to 1, got {total}")


def preceding_intent_ratios(corpus: Corpus) -> IntentRatioReport:
    """Attribute every labeled user turn to the nearest preceding agent
    turn's intent.

    Labeled turns with no preceding agent turn, or whose nearest preceding
    agent turn carries no intent annotation, are excluded and counted.
    """
    global_counts: Counter[Intent] = Counter()
    agent_counts: dict[str, Counter[Intent]] = defaultdict(Counter)
    excluded = 0
    for dialogue in corpus.dialogues:
        for turn in dialogue.turns:
            if not turn.is_user or turn.reformulation is None:
                continue
            preceding = None
            for prior in reversed(dialogue.turns[: turn.index]):
                if prior.speaker is Speaker.AGENT:
                    preceding = prior
                    break
            if preceding is None or preceding.intent is None:
                excluded += 1
                continue
            global_counts[preceding.intent] += 1
            agent_counts[dialogue.agent_id][preceding.intent] += 1

    attributed = sum(global_counts.values())
    ratios = {
        intent: global_counts[intent] / attributed if attributed else 0.0
        for intent in global_counts
    }
    per_agent: dict[str, dict[Intent, float]] = {}
    for agent_id, counts in agent_counts.items():
        agent_total = sum(counts.values())
        per_agent[agent_id] = {i: counts[i] / agent_total for i in global_counts}
    sigma: dict[Intent, float] = {}
    for intent in global_counts:
        values = [per_agent[a].get(intent, 0.0) for a in per_agent]
        if values:
            mean = sum(values) / len(values)
            sigma[intent] = math.sqrt(sum((v - mean) ** 2 for v in values) / len(values))
        else:
            sigma[intent] = 0.0
    return IntentRatioReport(
        ratios=ratios, sigma=sigma, attributed=attributed, excluded=excluded, per_agent=per_agent
    )


# ---------------------------------------------------------------------------
# adjacent type-pair frequencies


class PatternFrequency(NamedTuple):
    pair: tuple[ReformulationType, ReformulationType]
    ratio: float
    count: int


def pattern_frequencies(pieces: Sequence[DialoguePiece]) -> list[PatternFrequency]:
    """Ordered adjacent type pairs, most frequent first.

    Ratio is count over all adjacent pairs.  Ties break by count, then by
    the lexicographic pair name, so the order is stable across runs.
    """
    counts: Counter[tuple[ReformulationType, ReformulationType]] = Counter()
    for piece in pieces:
        states = piece.typed_states
        for prev, cur in zip(states, states[1:]):
            counts[(prev, cur)] += 1
    total = sum(counts.values())
    rows = [
        PatternFrequency(pair=pair, ratio=count / total, count=count)
        for pair, count in counts.items()
    ]
    rows.sort(key=lambda r: (-r.ratio, -r.count, r.pair[0].value, r.pair[1].value))
    return rows


# ---------------------------------------------------------------------------
# reformulation types across dialogue stages


@dataclass(frozen=True, slots=True)
class TurnBin:
    start: int
    end: int
    count: int
    distribution: dict[ReformulationType, float]

    def __post_init__(self) -> None:
        if self.count:
            total = sum(self.distribution.values())
            if abs(total - 1.0) > SIMPLEX_TOL:
                raise ValueError(f"bin distribution must sum to 1, got {total}")
        elif self.distribution:
            raise ValueError("empty bin must have an empty distribution")


@dataclass(frozen=True, slots=True)
class TurnBinReport:
    bin_width: int
    bins: tuple[TurnBin, ...]

    def first_moment(self, t: ReformulationType) -> float:
        """Mean bin index weighted by the per-bin mass of one type."""
        weights = [b.count * b.distribution.get(t, 0.0) for b in self.bins]
        total = sum(weights)
        if total == 0:
            return math.nan
        return sum(i * w for i, w in enumerate(weights)) / total


def turn_bin_distribution(corpus: Corpus, bin_width: int = 5) -> TurnBinReport:
    """Per-bin distribution of reformulation types, binned by turn index."""
    if bin_width < 1:
        raise ValueError("bin_width must be at least 1")
    by_bin: dict[int, Counter[ReformulationType]] = defaultdict(Counter)
    for dialogue in corpus.dialogues:
        for turn in dialogue.turns:
            if turn.is_user and turn.reformulation is not None:
                by_bin[turn.index // bin_width][turn.reformulation] += 1
    if not by_bin:
        return TurnBinReport(bin_width=bin_width, bins=())
    bins = []
    for index in range(max(by_bin) + 1):
        counts = by_bin.get(index, Counter())
        total = sum(counts.values())
        distribution = {t: counts[t] / total for t in TYPE_ORDER if counts[t]} if total else {}
        bins.append(
            TurnBin(
                start=index * bin_width,
                end=(index + 1) * bin_width,
                count=total,
                distribution=distribution,
            )
        )
    return TurnBinReport(bin_width=bin_width, bins=tuple(bins))


# ---------------------------------------------------------------------------
# variance and mean tests


class LeveneResult(NamedTuple):
    statistic: float
    p_value: float


class TTestResult(NamedTuple):
    statistic: float
    p_value: float


def levene_test(group_a: Sequence[float], group_b: Sequence[float]) -> LeveneResult:
    """Levene's W with group-mean centering for two groups.

    The p-value comes from the F distribution with (1, n_a + n_b - 2)
    degrees of freedom.  If neither group deviates from its mean, W is
    defined as 0 with p = 1.
    """
    a = [float(x) for x in group_a]
    b = [float(x) for x in group_b]
    if len(a) < 2 or len(b) < 2:
        raise ValueError("each group needs at least 2 observations")
    za = [abs(x - _mean(a)) for x in a]
    zb = [abs(x - _mean(b)) for x in b]
    z_all = za + zb
    grand = _mean(z_all)
    n_a, n_b = len(a), len(b)
    numerator = (n_a + n_b - 2) * (
        n_a * (_mean(za) - grand) ** 2 + n_b * (_mean(zb) - grand) ** 2
    )
    denominator = sum((z - _mean(za)) ** 2 for z in za) + sum((z - _mean(zb)) ** 2 for z in zb)
    if denominator == 0.0:
        return LeveneResult(0.0, 1.0)
    w = numerator / denominator
    p = float(_scipy_stats.f.sf(w, 1, n_a + n_b - 2))
    return LeveneResult(w, p)


def t_test(
    group_a: Sequence[float], group_b: Sequence[float], equal_variance: bool = True
) -> TTestResult:
    """Two-sided t-test on the group means: Student's pooled variant when
    ``equal_variance``, Welch otherwise.

    Zero variance with equal means yields (0, 1).  Zero variance with unequal
    means signals the unbounded case distinctly via an infinite statistic and
    p = 0.
    """
    a = [float(x) for x in group_a]
    b = [float(x) for x in group_b]
    if len(a) < 2 or len(b) < 2:
        raise ValueError("each group needs at least 2 observations")
    n_a, n_b = len(a), len(b)
    mean_a, mean_b = _mean(a), _mean(b)
    var_a = sum((x - mean_a) ** 2 for x in a) / (n_a - 1)
    var_b = sum((x - mean_b) ** 2 for x in b) / (n_b - 1)
    diff = mean_a - mean_b
    if equal_variance:
        pooled = ((n_a - 1) * var_a + (n_b - 1) * var_b) / (n_a + n_b - 2)
        se = math.sqrt(pooled * (1 / n_a + 1 / n_b))
        df = float(n_a + n_b - 2)
    else:
        se = math.sqrt(var_a / n_a + var_b / n_b)
        if var_a == 0.0 and var_b == 0.0:
            df = float(n_a + n_b - 2)
        else:
            df = (var_a / n_a + var_b / n_b) ** 2 / (
                (var_a / n_a) ** 2 / (n_a - 1) + (var_b / n_b) ** 2 / (n_b - 1)
            )
    if se == 0.0:
        if diff == 0.0:
            return TTestResult(0.0, 1.0)
        return TTestResult(math.copysign(math.inf, diff), 0.0)
    t = diff / se
    p = float(2.0 * _scipy_stats.t.sf(abs(t), df))
    return TTestResult(t, min(p, 1.0))


def _mean(values: Sequence[float]) -> float:
    return sum(values) / len(values)


# ---------------------------------------------------------------------------
# experience-group comparison


class TypeComparison(NamedTuple):
    levene: LeveneResult
    t: TTestResult
    pooled: bool
    n_experienced: int
    n_inexperienced: int


@dataclass(frozen=True, slots=True)
class ExperienceReport:
    """Per-intent, per-type test statistics comparing users with and without
    prior conversational-assistant experience."""

    comparisons: dict[Intent, dict[ReformulationType, TypeComparison]]
    insufficient: tuple[Intent, ...]
    skipped_dialogues: int

    def all_t_p_values(self) -> list[float]:
        return [c.t.p_value for per_type in self.comparisons.values() for c in per_type.values()]


def compare_experience_groups(corpus: Corpus) -> ExperienceReport:
    """For each intent, compare per-dialogue reformulation-type frequency
    vectors between experienced and inexperienced users.

    Levene's test picks the t-test flavor (pooled when variances look
    homogeneous at alpha=0.05, Welch otherwise).  Intents where either group
    has fewer than two dialogues are reported as insufficient.
    """
    # per (intent, experience flag): list of per-dialogue frequency vectors
    observations: dict[Intent, dict[bool, list[dict[ReformulationType, float]]]] = defaultdict(
        lambda: {True: [], False: []}
    )
    skipped = 0
    for dialogue in corpus.dialogues:
        profile = dialogue.user_profile
        if profile is None or profile.has_cra_experience is None:
            skipped += 1
            continue
        per_intent: dict[Intent | None, Counter[ReformulationType]] = defaultdict(Counter)
        for turn in dialogue.turns:
            if turn.is_user and turn.reformulation is not None:
                per_intent[turn.intent][turn.reformulation] += 1
        for intent, counts in per_intent.items():
            if intent is None:
                continue
            total = sum(counts.values())
            freq = {t: counts[t] / total for t in TYPE_ORDER}
            observations[intent][profile.has_cra_experience].append(freq)

    comparisons: dict[Intent, dict[ReformulationType, TypeComparison]] = {}
    insufficient: list[Intent] = []
    for intent in sorted(observations, key=lambda i: i.value):
        experienced = observations[intent][True]
        inexperienced = observations[intent][False]
        if len(experienced) < 2 or len(inexperienced) < 2:
            insufficient.append(intent)
            continue
        per_type: dict[ReformulationType, TypeComparison] = {}
        for t in TYPE_ORDER:
            group_a = [freq[t] for freq in experienced]
            group_b = [freq[t] for freq in inexperienced]
            levene = levene_test(group_a, group_b)
            pooled = levene.p_value >= VARIANCE_ALPHA
            result = t_test(group_a, group_b, equal_variance=pooled)
            per_type[t] = TypeComparison(
                levene=levene,
                t=result,
                pooled=pooled,
                n_experienced=len(group_a),
                n_inexperienced=len(group_b),
            )
        comparisons[intent] = per_type
    return ExperienceReport(
        comparisons=comparisons, insufficient=tuple(insufficient), skipped_dialogues=skipped
    )
