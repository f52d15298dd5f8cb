from __future__ import annotations

import random
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from reformkit.dialogue import SlotAnnotation, load_corpus

ROOT = Path(__file__).resolve().parent.parent
FIXTURES = ROOT / "fixtures"

_MOVIE_SUBJECTS = [
    ("a comedy movie", (SlotAnnotation("genre", "comedy"),)),
    ("movies like The Matrix", (SlotAnnotation("movie", "The Matrix"),)),
    ("an action film", (SlotAnnotation("genre", "action"),)),
    ("a good movie like Inception", (SlotAnnotation("movie", "Inception"),)),
    ("a romantic comedy", (SlotAnnotation("genre", "romantic comedy"),)),
    ("a scary movie for tonight", (SlotAnnotation("genre", "horror"),)),
    ("a classic drama", (SlotAnnotation("genre", "drama"),)),
]
_TRAVEL_SUBJECTS = [
    ("a nice restaurant in Dubai", (SlotAnnotation("location", "Dubai"),)),
    ("restaurants in Fort Lauderdale", (SlotAnnotation("location", "Fort Lauderdale"),)),
    ("a cheap hotel near the airport", ()),
    ("a taxi from the airport", ()),
    ("a trip to Tokyo", (SlotAnnotation("location", "Tokyo"),)),
    ("a good place for dinner in Rome", (SlotAnnotation("location", "Rome"),)),
]
_MUSIC_SUBJECTS = [
    ("songs by Queen", (SlotAnnotation("musician", "Queen"),)),
    ("a popular song for a party", ()),
]
_FRAMES = [
    "I am looking for {x}.",
    "I'm looking for {x}.",
    "No, I'm looking for {x}.",
    "Can you find me {x}?",
    "I want to know more about {x}",
    "I want {x}.",
    "Show me {x}.",
    "I am into {x}.",
    "Do you have {x}?",
    "Give me {x}.",
]
_ADJECTIVES = ["funny", "scary", "nice", "good", "cheap", "popular", "new", "old"]


def sample_cases(n: int, seed: int = 0) -> list[tuple[str, tuple[SlotAnnotation, ...], str]]:
    """Deterministic utterance/slots/domain triples shaped like study requests."""
    rng = random.Random(seed)
    cases = []
    for _ in range(n):
        roll = rng.random()
        if roll < 0.1:
            utterance = f"Something {rng.choice(_ADJECTIVES)}."
            cases.append((utterance, (), "movie"))
            continue
        domain = rng.choice(["movie", "movie", "travel", "music"])
        subjects = {
            "movie": _MOVIE_SUBJECTS,
            "travel": _TRAVEL_SUBJECTS,
            "music": _MUSIC_SUBJECTS,
        }[domain]
        subject, slots = rng.choice(subjects)
        frame = rng.choice(_FRAMES)
        cases.append((frame.format(x=subject), slots, domain))
    return cases


def sample_utterances(n: int, seed: int = 0) -> list[str]:
    return [utterance for utterance, _, _ in sample_cases(n, seed)]


@pytest.fixture(scope="session")
def study_corpus_path() -> Path:
    return FIXTURES / "study.jsonl"


@pytest.fixture(scope="session")
def study_corpus(study_corpus_path):
    return load_corpus(study_corpus_path)


@pytest.fixture()
def seeds_path() -> Path:
    return FIXTURES / "seeds.txt"
