"""Build the shipped study-corpus fixture (fixtures/study.jsonl).

The fixture is synthetic but constructed to exact aggregate targets:

* adjacent type-pair counts: rephrase->simplify 80, rephrase->refine 63,
  simplify->rephrase 53, refine->simplify 20, simplify->refine 19,
  refine->rephrase 18, all other pairs <= 17, total 630;
* 700 reformulations attributable to a preceding annotated agent turn with
  intent ratios failed .62, suggest .19, elicit .06, extract .03, list .03,
  similar .02, repeat .02, non_disclose .02, end_disclose .01 (exact), plus
  140 reformulations whose preceding agent turn is unannotated;
* rephrasing mass sits earlier in dialogues than simplification;
* experienced/inexperienced user groups behave near-identically per intent.

Deterministic: running it twice produces byte-identical output.
"""

from __future__ import annotations

import json
import random
import sys
from collections import Counter, defaultdict
from pathlib import Path

from reformkit.analysis import (
    compare_experience_groups,
    pattern_frequencies,
    preceding_intent_ratios,
    turn_bin_distribution,
)
from reformkit.dialogue import Intent, ReformulationType as RT, load_corpus
from reformkit.dialogue import extract_human_sequences, extract_triads
from reformkit.dynamics import estimate_transition_matrix, segment_pieces
from reformkit.generators import rule_refine, rule_rephrase, rule_restart, rule_simplify

ROOT = Path(__file__).resolve().parent.parent
OUT_PATH = ROOT / "fixtures" / "study.jsonl"
SEEDS_PATH = ROOT / "fixtures" / "seeds.txt"

TOTAL_TRANSITIONS = 630
TOTAL_PIECES = 210
ATTRIBUTED = 700
UNANNOTATED = 140
MAX_TRAIL_EDGES = 6

NAMED_PAIRS: dict[tuple[RT, RT], int] = {
    (RT.REPHRASE, RT.SIMPLIFY): 80,
    (RT.REPHRASE, RT.REFINE): 63,
    (RT.SIMPLIFY, RT.REPHRASE): 53,
    (RT.REFINE, RT.SIMPLIFY): 20,
    (RT.SIMPLIFY, RT.REFINE): 19,
    (RT.REFINE, RT.REPHRASE): 18,
}

FILLER_PAIRS: dict[tuple[RT, RT], int] = {
    (RT.REPEAT, RT.REPEAT): 17,
    (RT.REPHRASE, RT.REPEAT): 17,
    (RT.REPEAT, RT.REPHRASE): 17,
    (RT.SIMPLIFY, RT.SIMPLIFY): 16,
    (RT.REPHRASE, RT.REPHRASE): 16,
    (RT.REPEAT, RT.SIMPLIFY): 16,
    (RT.SIMPLIFY, RT.REPEAT): 15,
    (RT.START_RESTART, RT.REPHRASE): 15,
    (RT.REPHRASE, RT.START_RESTART): 14,
    (RT.REFINE, RT.REPEAT): 14,
    (RT.REPEAT, RT.REFINE): 14,
    (RT.SIMPLIFY, RT.STOP): 13,
    (RT.REFINE, RT.REFINE): 13,
    (RT.START_RESTART, RT.SIMPLIFY): 13,
    (RT.SIMPLIFY, RT.START_RESTART): 12,
    (RT.REPHRASE, RT.STOP): 12,
    (RT.START_RESTART, RT.REFINE): 12,
    (RT.REPEAT, RT.STOP): 11,
    (RT.REPEAT, RT.START_RESTART): 11,
    (RT.START_RESTART, RT.REPEAT): 11,
    (RT.REFINE, RT.START_RESTART): 10,
    (RT.START_RESTART, RT.START_RESTART): 10,
    (RT.REFINE, RT.STOP): 9,
    (RT.CHANGE, RT.REPHRASE): 9,
    (RT.REPHRASE, RT.CHANGE): 8,
    (RT.SIMPLIFY, RT.CHANGE): 7,
    (RT.CHANGE, RT.SIMPLIFY): 7,
    (RT.CHANGE, RT.REPEAT): 6,
    (RT.CHANGE, RT.REFINE): 6,
    (RT.START_RESTART, RT.CHANGE): 6,
    (RT.CHANGE, RT.CHANGE): 5,
    (RT.REPEAT, RT.CHANGE): 5,
    (RT.REFINE, RT.CHANGE): 5,
    (RT.CHANGE, RT.START_RESTART): 5,
}

INTENT_BUDGET: dict[Intent, int] = {
    Intent.FAILED: 434,
    Intent.SUGGEST: 133,
    Intent.ELICIT: 42,
    Intent.EXTRACT: 21,
    Intent.LIST: 21,
    Intent.SIMILAR: 14,
    Intent.REPEAT: 14,
    Intent.NON_DISCLOSE: 14,
    Intent.END_DISCLOSE: 7,
}

USER_INTENTS = [Intent.DISCLOSE, Intent.REVISE, Intent.INQUIRE_SIMILAR]

MOVIE_GENRES = ["comedy", "action", "drama", "thriller", "horror", "romance", "documentary"]
MOVIE_TITLES = [
    "The Matrix",
    "A Tale of Two Cities",
    "Dumb and Dumber",
    "Inception",
    "Casablanca",
    "Jurassic Park",
    "The Godfather",
    "Back to the Future",
]
LOCATIONS = ["Dubai", "Paris", "Fort Lauderdale", "Tokyo", "Oslo", "Rome", "Barcelona", "Lisbon"]

AGENT_UTTERANCES: dict[Intent | None, str] = {
    Intent.FAILED: "Sorry, I didn't get that. Can you rephrase?",
    Intent.SUGGEST: "I think you should give this one a shot!",
    Intent.ELICIT: "Can you tell me about something you like?",
    Intent.EXTRACT: "Got it, noting that down.",
    Intent.LIST: "Here are some options I found.",
    Intent.SIMILAR: "Here is something similar you might enjoy.",
    Intent.REPEAT: "As I said, here are the options I found.",
    Intent.NON_DISCLOSE: "I'm pretty solid on a bunch of things so far.",
    Intent.END_DISCLOSE: "That's all I got at the moment.",
    None: "Hmm, let me think about that.",
}

STOP_TEXTS = [
    "Thanks anyway, I think I am all set.",
    "Never mind, thanks for trying.",
    "Thanks again, I will stop here.",
]
CHANGE_TEXTS_MOVIE = [
    "Okay, let's try a movie that is similar to Speed instead.",
    "Actually, forget that, how about a western instead?",
    "Let's switch it up, I want something animated instead.",
]
CHANGE_TEXTS_TRAVEL = [
    "Okay, let's look at flights instead.",
    "Actually, forget the food, I need a rental car instead.",
    "Let's switch it up, show me museums instead.",
]


def build_trails(rng: random.Random) -> list[list[RT]]:
    """Decompose the pair multiset into trails of at most MAX_TRAIL_EDGES edges,
    then pad with singleton pieces up to TOTAL_PIECES."""
    pairs = dict(NAMED_PAIRS)
    pairs.update(FILLER_PAIRS)
    assert sum(pairs.values()) == TOTAL_TRANSITIONS
    assert all(c <= 17 for p, c in pairs.items() if p not in NAMED_PAIRS)

    remaining: dict[RT, Counter] = defaultdict(Counter)
    for (a, b), count in pairs.items():
        remaining[a][b] = count
    out_deg = Counter({t: sum(c.values()) for t, c in remaining.items()})
    in_deg: Counter = Counter()
    for (a, b), count in pairs.items():
        in_deg[b] += count

    def pick_start() -> RT | None:
        starters = [t for t in RT if out_deg[t] - in_deg[t] > 0 and out_deg[t] > 0]
        if not starters:
            starters = [t for t in RT if out_deg[t] > 0]
        if not starters:
            return None
        return max(starters, key=lambda t: (out_deg[t], t.value))

    trails: list[list[RT]] = []
    while True:
        start = pick_start()
        if start is None:
            break
        trail = [start]
        current = start
        for _ in range(MAX_TRAIL_EDGES):
            successors = [s for s, c in remaining[current].items() if c > 0]
            if not successors:
                break
            nxt = max(successors, key=lambda s: (remaining[current][s], s.value))
            remaining[current][nxt] -= 1
            out_deg[current] -= 1
            in_deg[nxt] -= 1
            trail.append(nxt)
            current = nxt
        trails.append(trail)

    # verify the decomposition reproduces the pair multiset exactly
    seen: Counter = Counter()
    for trail in trails:
        for a, b in zip(trail, trail[1:]):
            seen[(a, b)] += 1
    assert seen == Counter(pairs), "trail decomposition does not match the pair table"
    assert len(trails) <= TOTAL_PIECES, f"too many trails: {len(trails)}"

    singleton_cycle = [RT.REPHRASE, RT.SIMPLIFY, RT.REPEAT, RT.REFINE]
    while len(trails) < TOTAL_PIECES:
        trails.append([singleton_cycle[len(trails) % len(singleton_cycle)]])
    states = sum(len(t) for t in trails)
    assert states == TOTAL_TRANSITIONS + TOTAL_PIECES, states
    return trails


def seed_utterance(intent: Intent, domain: str, slots: list[dict], rng: random.Random) -> str:
    value = slots[0]["value"]
    if domain == "movie":
        choices = {
            Intent.DISCLOSE: [
                f"I am looking for a {value} movie.",
                f"I want to watch a {value} movie tonight.",
            ]
            if slots[0]["slot_kind"] == "genre"
            else [
                f"I am looking for movies like {value}.",
                f"Can you find me movies similar to {value}?",
            ],
            Intent.REVISE: [
                f"Actually, I am looking for a {value} movie now.",
                f"On second thought, I want something like {value}.",
            ],
            Intent.INQUIRE_SIMILAR: [
                f"Can you find me movies similar to {value}?",
                f"What else is there like {value}?",
            ],
        }
    else:
        choices = {
            Intent.DISCLOSE: [
                f"I am looking for restaurants in {value}.",
                f"I want to know more about restaurants in {value}",
            ],
            Intent.REVISE: [
                f"Actually, I am looking for a hotel in {value} now.",
                f"On second thought, I want to stay in {value}.",
            ],
            Intent.INQUIRE_SIMILAR: [
                f"Can you find me places like the ones in {value}?",
                f"What else can I do in {value}?",
            ],
        }
    return rng.choice(choices[intent])


def reformulate(previous: str, rtype: RT, domain: str, slots: list[dict], rng: random.Random) -> str:
    from reformkit.dialogue import SlotAnnotation

    annotations = [SlotAnnotation(s["slot_kind"], s["value"]) for s in slots]
    if rtype is RT.REPEAT:
        return previous
    if rtype is RT.REPHRASE:
        return rule_rephrase(previous, seed=rng.randrange(2**31))
    if rtype is RT.SIMPLIFY:
        return rule_simplify(previous, annotations)
    if rtype is RT.REFINE:
        extra = (
            SlotAnnotation("genre", rng.choice(MOVIE_GENRES))
            if domain == "movie"
            else SlotAnnotation("location", rng.choice(LOCATIONS))
        )
        return rule_refine(previous, [extra], domain)
    if rtype is RT.START_RESTART:
        return rule_restart(previous, annotations, domain)
    if rtype is RT.CHANGE:
        pool = CHANGE_TEXTS_MOVIE if domain == "movie" else CHANGE_TEXTS_TRAVEL
        return rng.choice(pool)
    return rng.choice(STOP_TEXTS)


def main() -> int:
    rng = random.Random(20_240_527)
    trails = build_trails(rng)

    # pair pieces with identical type signatures where possible, so the two
    # experience groups end up with near-identical behavior per intent
    order = sorted(range(len(trails)), key=lambda i: [t.value for t in trails[i]])

    # queue of preceding-agent intents: exact global counts, shuffled
    intent_queue: list[Intent | None] = []
    for intent, count in INTENT_BUDGET.items():
        intent_queue.extend([intent] * count)
    intent_queue.extend([None] * UNANNOTATED)
    assert len(intent_queue) == ATTRIBUTED + UNANNOTATED
    rng.shuffle(intent_queue)
    queue_position = 0

    age_bands = ["18-29", "30-39", "40+"]
    genders = ["female", "male"]
    educations = ["secondary", "bachelor", "master", "doctorate"]

    records = []
    for pair_index in range(len(order) // 2 + len(order) % 2):
        members = order[2 * pair_index : 2 * pair_index + 2]
        intent = USER_INTENTS[pair_index % len(USER_INTENTS)]
        for member_offset, trail_index in enumerate(members):
            piece_number = 2 * pair_index + member_offset
            agent_number = piece_number % 4 + 1
            agent_id = f"A{agent_number}"
            domain = "movie" if agent_number <= 3 else "travel"
            if domain == "movie":
                if piece_number % 2 == 0:
                    slots = [{"slot_kind": "genre", "value": MOVIE_GENRES[piece_number % len(MOVIE_GENRES)]}]
                else:
                    slots = [{"slot_kind": "movie", "value": MOVIE_TITLES[piece_number % len(MOVIE_TITLES)]}]
            else:
                slots = [{"slot_kind": "location", "value": LOCATIONS[piece_number % len(LOCATIONS)]}]

            states = trails[trail_index]
            seed = seed_utterance(intent, domain, slots, rng)
            turns = [
                {
                    "speaker": "user",
                    "utterance": seed,
                    "intent": intent.value,
                    "slots": slots,
                }
            ]
            previous = seed
            for state in states:
                agent_intent = intent_queue[queue_position]
                queue_position += 1
                agent_turn = {"speaker": "agent", "utterance": AGENT_UTTERANCES[agent_intent]}
                if agent_intent is not None:
                    agent_turn["intent"] = agent_intent.value
                turns.append(agent_turn)
                utterance = reformulate(previous, state, domain, slots, rng)
                turns.append(
                    {
                        "speaker": "user",
                        "utterance": utterance,
                        "intent": intent.value,
                        "slots": slots,
                        "reformulation": state.value,
                    }
                )
                previous = utterance

            records.append(
                {
                    "kind": "dialogue",
                    "dialogue_id": f"d{piece_number:04d}",
                    "agent_id": agent_id,
                    "domain": domain,
                    "turns": turns,
                    "user_profile": {
                        "age_band": age_bands[piece_number % 3],
                        "gender": genders[piece_number % 2],
                        "education": educations[piece_number % 4],
                        "has_cra_experience": member_offset == 0,
                    },
                }
            )
    assert queue_position == len(intent_queue)

    OUT_PATH.parent.mkdir(exist_ok=True)
    with open(OUT_PATH, "w", encoding="utf-8") as handle:
        for record in records:
            handle.write(json.dumps(record, ensure_ascii=False) + "\n")

    seeds = []
    seed_rng = random.Random(7)
    for intent in USER_INTENTS:
        for domain in ("movie", "travel"):
            slots = (
                [{"slot_kind": "genre", "value": "comedy"}]
                if domain == "movie"
                else [{"slot_kind": "location", "value": "Dubai"}]
            )
            seeds.append(seed_utterance(intent, domain, slots, seed_rng))
    seeds.extend(
        [
            "I am into a movie like a tale of two cities",
            "Something light-hearted.",
            "Never mind. Can you book me a taxi from the airport?",
            "I am looking for amazon premium movie.",
        ]
    )
    SEEDS_PATH.write_text("\n".join(dict.fromkeys(seeds)) + "\n", encoding="utf-8")

    # ---- self-checks -----------------------------------------------------
    corpus = load_corpus(OUT_PATH)
    pieces = segment_pieces(corpus)
    assert len(pieces) == TOTAL_PIECES, len(pieces)

    frequencies = pattern_frequencies(pieces)
    expected_top = sorted(NAMED_PAIRS.items(), key=lambda kv: -kv[1])
    for row, (pair, count) in zip(frequencies, expected_top):
        assert row.pair == pair and row.count == count, (row, pair, count)
    assert abs(frequencies[0].ratio - 80 / 630) < 1e-12

    report = preceding_intent_ratios(corpus)
    assert report.attributed == ATTRIBUTED and report.excluded == UNANNOTATED
    for intent, count in INTENT_BUDGET.items():
        assert abs(report.ratios[intent] - count / ATTRIBUTED) < 1e-12, intent

    bins = turn_bin_distribution(corpus)
    m_rephrase = bins.first_moment(RT.REPHRASE)
    m_simplify = bins.first_moment(RT.SIMPLIFY)
    assert m_rephrase < m_simplify, (m_rephrase, m_simplify)

    experience = compare_experience_groups(corpus)
    p_values = experience.all_t_p_values()
    assert p_values and min(p_values) > 0.1, min(p_values)

    extraction = extract_triads(corpus)
    assert extraction.skipped == 0
    assert len(extraction) == TOTAL_TRANSITIONS + TOTAL_PIECES

    sequences = extract_human_sequences(corpus)
    assert len(sequences) == TOTAL_PIECES

    matrix = estimate_transition_matrix(pieces)
    flat_max = matrix.counts.argmax()
    i, j = divmod(int(flat_max), len(matrix.types))
    assert (matrix.types[i], matrix.types[j]) == (RT.REPHRASE, RT.SIMPLIFY)

    print(f"wrote {OUT_PATH} ({len(records)} dialogues) and {SEEDS_PATH}")
    print(f"pieces={len(pieces)} transitions={TOTAL_TRANSITIONS} attributed={report.attributed}")
    print(f"first moments: rephrase={m_rephrase:.3f} simplify={m_simplify:.3f}")
    print(f"experience-comparison min p-value: {min(p_values):.3f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
