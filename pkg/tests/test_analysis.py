import math
import random

import pytest

from reformkit.analysis import (
    compare_experience_groups,
    levene_test,
    pattern_frequencies,
    preceding_intent_ratios,
    t_test,
    turn_bin_distribution,
)
from reformkit.dialogue import Corpus, Intent, ReformulationType, UserProfile
from reformkit.dynamics import segment_pieces

from oracles import oracle_levene, oracle_t_test
from test_dialogue import agent, make_dialogue, user
from test_dynamics import piece

RT = ReformulationType


class TestPrecedingIntentRatios:
    def test_all_failed_single_agent(self):
        turns = [user(0, "seed", Intent.DISCLOSE)]
        for k in range(4):
            turns.append(agent(len(turns), "sorry?", Intent.FAILED))
            turns.append(user(len(turns), f"retry {k}", Intent.DISCLOSE, (), RT.REPHRASE))
        report = preceding_intent_ratios(Corpus(dialogues=(make_dialogue(turns),)))
        assert report.ratios == {Intent.FAILED: 1.0}
        assert report.sigma[Intent.FAILED] == 0.0
        assert report.attributed == 4 and report.excluded == 0

    def test_hand_tally(self):
        # ten dialogues; 6 failed, 3 suggest, 1 elicit before reformulations
        dialogues = []
        preceding = [Intent.FAILED] * 6 + [Intent.SUGGEST] * 3 + [Intent.ELICIT]
        for i, intent in enumerate(preceding):
            turns = [
                user(0, "seed", Intent.DISCLOSE),
                agent(1, "reply", intent),
                user(2, "retry", Intent.DISCLOSE, (), RT.REPHRASE),
            ]
            dialogues.append(make_dialogue(turns, dialogue_id=f"d{i}", agent_id=f"A{i % 2 + 1}"))
        report = preceding_intent_ratios(Corpus(dialogues=tuple(dialogues)))
        assert report.ratios[Intent.FAILED] == pytest.approx(0.6)
        assert report.ratios[Intent.SUGGEST] == pytest.approx(0.3)
        assert report.ratios[Intent.ELICIT] == pytest.approx(0.1)
        assert sum(report.ratios.values()) == pytest.approx(1.0, abs=1e-9)

    def test_unattributable_reformulations_are_excluded(self):
        turns = [
            user(0, "seed", Intent.DISCLOSE),
            user(1, "retry with no agent before", Intent.DISCLOSE, (), RT.REPHRASE),
            agent(2, "unannotated reply"),
            user(3, "retry again", Intent.DISCLOSE, (), RT.REPHRASE),
            agent(4, "sorry?", Intent.FAILED),
            user(5, "final retry", Intent.DISCLOSE, (), RT.SIMPLIFY),
        ]
        report = preceding_intent_ratios(Corpus(dialogues=(make_dialogue(turns),)))
        assert report.excluded == 2
        assert report.attributed == 1
        assert report.ratios == {Intent.FAILED: 1.0}

    def test_study_fixture_headline_ratios(self, study_corpus):
        report = preceding_intent_ratios(study_corpus)
        assert report.ratios[Intent.FAILED] == pytest.approx(0.62, abs=1e-9)
        assert report.ratios[Intent.SUGGEST] == pytest.approx(0.19, abs=1e-9)
        assert report.ratios[Intent.ELICIT] == pytest.approx(0.06, abs=1e-9)
        assert sum(report.ratios.values()) == pytest.approx(1.0, abs=1e-9)
        assert set(report.per_agent) == {"A1", "A2", "A3", "A4"}


class TestPatternFrequencies:
    def test_single_pair(self):
        rows = pattern_frequencies([piece([RT.REPHRASE, RT.SIMPLIFY])])
        assert rows == [((RT.REPHRASE, RT.SIMPLIFY), 1.0, 1)]

    def test_hand_counts(self):
        pieces = [
            piece([RT.REPHRASE, RT.SIMPLIFY, RT.REPHRASE, RT.SIMPLIFY]),
            piece([RT.SIMPLIFY, RT.REPHRASE, RT.SIMPLIFY]),
        ]
        rows = pattern_frequencies(pieces)
        by_pair = {r.pair: r for r in rows}
        assert by_pair[(RT.REPHRASE, RT.SIMPLIFY)].count == 3
        assert by_pair[(RT.SIMPLIFY, RT.REPHRASE)].count == 2
        assert by_pair[(RT.REPHRASE, RT.SIMPLIFY)].ratio == pytest.approx(0.6)
        assert by_pair[(RT.SIMPLIFY, RT.REPHRASE)].ratio == pytest.approx(0.4)

    def test_ties_break_lexicographically(self):
        pieces = [piece([RT.SIMPLIFY, RT.REPEAT]), piece([RT.REPHRASE, RT.SIMPLIFY])]
        rows = pattern_frequencies(pieces)
        assert [r.pair for r in rows] == [
            (RT.REPHRASE, RT.SIMPLIFY),
            (RT.SIMPLIFY, RT.REPEAT),
        ]

    def test_study_fixture_top_three(self, study_corpus):
        rows = pattern_frequencies(segment_pieces(study_corpus))
        assert [r.pair for r in rows[:3]] == [
            (RT.REPHRASE, RT.SIMPLIFY),
            (RT.REPHRASE, RT.REFINE),
            (RT.SIMPLIFY, RT.REPHRASE),
        ]
        assert [r.count for r in rows[:3]] == [80, 63, 53]
        assert rows[0].ratio == pytest.approx(80 / 630)

    def test_deterministic_order(self, study_corpus):
        pieces = segment_pieces(study_corpus)
        assert pattern_frequencies(pieces) == pattern_frequencies(list(reversed(pieces)))


class TestTurnBins:
    def test_single_bin(self):
        turns = [
            user(0, "seed", Intent.DISCLOSE),
            agent(1, "sorry?", Intent.FAILED),
            user(2, "retry", Intent.DISCLOSE, (), RT.REPHRASE),
        ]
        report = turn_bin_distribution(Corpus(dialogues=(make_dialogue(turns),)))
        assert len(report.bins) == 1
        assert report.bins[0].start == 0 and report.bins[0].end == 5
        assert report.bins[0].count == 1
        assert report.bins[0].distribution == {RT.REPHRASE: 1.0}

    def test_hand_assignment_two_bins(self):
        turns = [user(0, "seed", Intent.DISCLOSE)]
        for index in range(1, 5):
            turns.append(user(index, f"r{index}", Intent.DISCLOSE, (), RT.REPHRASE))
        turns.append(user(5, "break", Intent.DISCLOSE))
        for index in range(6, 10):
            turns.append(user(index, f"s{index}", Intent.DISCLOSE, (), RT.SIMPLIFY))
        report = turn_bin_distribution(Corpus(dialogues=(make_dialogue(turns),)))
        assert report.bins[0].distribution == {RT.REPHRASE: 1.0}
        assert report.bins[1].distribution == {RT.SIMPLIFY: 1.0}
        assert report.bins[0].count == 4 and report.bins[1].count == 4

    def test_bin_width_validation(self, study_corpus):
        with pytest.raises(ValueError):
            turn_bin_distribution(study_corpus, bin_width=0)

    def test_rephrase_earlier_than_simplify_on_study_fixture(self, study_corpus):
        report = turn_bin_distribution(study_corpus)
        assert report.first_moment(RT.REPHRASE) < report.first_moment(RT.SIMPLIFY)

    def test_empty_corpus_yields_no_bins(self):
        corpus = Corpus(dialogues=(make_dialogue([user(0, "hello")]),))
        assert turn_bin_distribution(corpus).bins == ()


class TestLevene:
    def test_identical_groups(self):
        w, p = levene_test([1, 2, 3], [1, 2, 3])
        assert w == 0.0 and p == 1.0

    def test_degenerate_groups(self):
        w, p = levene_test([1, 1, 1], [1, 1, 1])
        assert w == 0.0 and p == 1.0

    def test_frozen_fixture(self):
        w, p = levene_test([0, 2, 4, 6], [2, 3, 4, 5])
        assert w == pytest.approx(2.4, abs=1e-12)
        assert p == pytest.approx(0.17230829673039999, abs=1e-9)

    def test_requires_two_observations(self):
        with pytest.raises(ValueError):
            levene_test([1], [1, 2])

    def test_matches_oracle_on_random_fixtures(self):
        rng = random.Random(17)
        for _ in range(50):
            a = [rng.uniform(-5, 5) for _ in range(rng.randint(2, 12))]
            b = [rng.uniform(-5, 5) for _ in range(rng.randint(2, 12))]
            w, p = levene_test(a, b)
            ow, op = oracle_levene(a, b)
            assert w == pytest.approx(ow, abs=1e-9)
            assert p == pytest.approx(op, abs=1e-9)


class TestTTest:
    def test_equal_means(self):
        t, p = t_test([1, 2, 3], [3, 2, 1])
        assert t == 0.0 and p == 1.0

    def test_frozen_pooled_fixture(self):
        t, p = t_test([1, 2, 3, 4], [2, 3, 4, 5], equal_variance=True)
        assert t == pytest.approx(-1.0954451150103322, abs=1e-9)
        assert p == pytest.approx(0.31533359620122973, abs=1e-9)

    def test_frozen_welch_fixture(self):
        t, p = t_test([1.5, 2.5, 9.0, 4.0, 3.0], [2.0, 2.2, 2.4, 2.6], equal_variance=False)
        assert t == pytest.approx(1.2881498917209401, abs=1e-9)
        assert p == pytest.approx(0.26593926089600934, abs=1e-9)

    def test_zero_variance_unequal_means_is_infinite(self):
        t, p = t_test([1, 1, 1], [2, 2, 2])
        assert math.isinf(t) and t < 0
        assert p == 0.0

    def test_matches_oracle_on_random_fixtures(self):
        rng = random.Random(23)
        for _ in range(50):
            a = [rng.uniform(-5, 5) for _ in range(rng.randint(2, 12))]
            b = [rng.uniform(-5, 5) for _ in range(rng.randint(2, 12))]
            pooled = rng.random() < 0.5
            t, p = t_test(a, b, equal_variance=pooled)
            ot, op = oracle_t_test(a, b, equal_variance=pooled)
            assert t == pytest.approx(ot, abs=1e-9)
            assert p == pytest.approx(op, abs=1e-9)


def experience_dialogue(dialogue_id, experienced, types, intent=Intent.DISCLOSE):
    turns = [user(0, "seed", intent)]
    for k, t in enumerate(types):
        turns.append(agent(len(turns), "sorry?", Intent.FAILED))
        turns.append(user(len(turns), f"retry {k}", intent, (), t))
    profile = UserProfile(has_cra_experience=experienced)
    return make_dialogue(turns, dialogue_id=dialogue_id, profile=profile)


class TestExperienceGroups:
    def test_identical_groups_yield_p_one(self):
        dialogues = []
        for i in range(3):
            dialogues.append(experience_dialogue(f"e{i}", True, [RT.REPHRASE, RT.SIMPLIFY]))
            dialogues.append(experience_dialogue(f"n{i}", False, [RT.REPHRASE, RT.SIMPLIFY]))
        report = compare_experience_groups(Corpus(dialogues=tuple(dialogues)))
        assert report.comparisons
        for per_type in report.comparisons.values():
            for comparison in per_type.values():
                assert comparison.t.p_value == pytest.approx(1.0)

    def test_study_fixture_not_significant(self, study_corpus):
        report = compare_experience_groups(study_corpus)
        p_values = report.all_t_p_values()
        assert p_values and min(p_values) > 0.1

    def test_divergent_group_detected(self):
        dialogues = []
        mixes = [
            [RT.REPHRASE, RT.REPHRASE],
            [RT.REPHRASE, RT.REFINE],
            [RT.REPHRASE, RT.REPEAT],
            [RT.REFINE, RT.REPHRASE],
        ]
        for i, mix in enumerate(mixes):
            dialogues.append(experience_dialogue(f"e{i}", True, mix))
            dialogues.append(experience_dialogue(f"n{i}", False, [RT.SIMPLIFY, RT.SIMPLIFY]))
        report = compare_experience_groups(Corpus(dialogues=tuple(dialogues)))
        comparison = report.comparisons[Intent.DISCLOSE][RT.SIMPLIFY]
        assert comparison.t.p_value < 0.05
        # verified against the independent oracle
        group_a = [0.0, 0.0, 0.0, 0.0]
        group_b = [1.0, 1.0, 1.0, 1.0]
        ot, op = oracle_t_test(group_a, group_b, equal_variance=comparison.pooled)
        assert comparison.t.p_value == pytest.approx(op, abs=1e-9)

    def test_insufficient_data_reported(self):
        dialogues = [
            experience_dialogue("e0", True, [RT.REPHRASE]),
            experience_dialogue("e1", True, [RT.REPHRASE]),
            experience_dialogue("n0", False, [RT.REPHRASE]),
            experience_dialogue("x0", True, [RT.SIMPLIFY], intent=Intent.REVISE),
        ]
        report = compare_experience_groups(Corpus(dialogues=tuple(dialogues)))
        assert Intent.DISCLOSE in report.insufficient
        assert Intent.REVISE in report.insufficient
        assert not report.comparisons

    def test_dialogues_without_profile_are_skipped(self):
        dialogues = [
            experience_dialogue("e0", True, [RT.REPHRASE]),
            make_dialogue([user(0, "no profile")], dialogue_id="p0"),
        ]
        report = compare_experience_groups(Corpus(dialogues=tuple(dialogues)))
        assert report.skipped_dialogues == 1
