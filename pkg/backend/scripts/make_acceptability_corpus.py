"""Build the bundled acceptability corpus (data/acceptability.jsonl).

Acceptable sentences are well-formed recommendation requests; unacceptable
ones follow three anomaly families: consumption verbs applied to abstract
attributes ("watch a rating"), scrambled word order, and degenerate
repetition.  Deterministic output.
"""

from __future__ import annotations

import json
import random
from pathlib import Path

OUT = Path(__file__).resolve().parent.parent / "data" / "acceptability.jsonl"

SUBJECTS = ["I", "She", "He", "My friend", "We"]
WATCH_OBJECTS = ["movie", "film", "comedy", "thriller", "documentary", "show"]
EAT_OBJECTS = ["meal", "dinner", "pizza", "steak", "dessert"]
LISTEN_OBJECTS = ["song", "track", "album", "playlist"]
ATTRIBUTES = ["rating", "price", "review", "score", "opinion", "quality", "reputation"]
ADJECTIVES = ["good", "great", "nice", "new", "popular", "cheap", "funny", "classic"]
PLACES = ["Dubai", "Paris", "Rome", "Tokyo", "Oslo", "Barcelona"]
TITLES = ["The Matrix", "Inception", "Casablanca", "Titanic", "Jurassic Park"]


def acceptable_sentences(rng: random.Random) -> list[str]:
    sentences = []
    for subject in SUBJECTS:
        verb = "want" if subject in ("I", "We") else "wants"
        for obj in WATCH_OBJECTS:
            adj = rng.choice(ADJECTIVES)
            sentences.append(f"{subject} {verb} to watch a {adj} {obj}.")
        for obj in EAT_OBJECTS[:3]:
            adj = rng.choice(ADJECTIVES)
            sentences.append(f"{subject} {verb} to eat a {adj} {obj}.")
        for obj in LISTEN_OBJECTS[:3]:
            sentences.append(f"{subject} {verb} to listen to a {rng.choice(ADJECTIVES)} {obj}.")
    for place in PLACES:
        sentences.append(f"Can you find me a restaurant in {place}?")
        sentences.append(f"I am looking for a hotel in {place}.")
        sentences.append(f"What should I see in {place}?")
    for title in TITLES:
        sentences.append(f"Show me movies like {title}.")
        sentences.append(f"I liked {title}, give me something similar.")
    sentences += [
        "I am looking for a comedy movie.",
        "Can you book me a taxi from the airport?",
        "Something light-hearted would be great.",
        "No, I'm looking for a restaurant.",
        "Please recommend a film for tonight.",
        "Do you have anything with good reviews?",
        "Play me something by Queen.",
        "I need a cheap flight to Rome.",
        "What restaurants do you know of in Fort Lauderdale?",
        "Give me more options, please.",
        "That one looks great, thank you.",
        "Could you suggest a family friendly movie?",
    ]
    return sentences


def anomalous_sentences(rng: random.Random) -> list[str]:
    sentences = []
    # consumption verbs applied to abstract attributes
    for subject in SUBJECTS:
        verb = "want" if subject in ("I", "We") else "wants"
        for attribute in ATTRIBUTES:
            adj = rng.choice(ADJECTIVES)
            sentences.append(f"{subject} {verb} to watch a {adj} {attribute}.")
        for attribute in ATTRIBUTES[:4]:
            sentences.append(f"{subject} {verb} to eat a {rng.choice(ADJECTIVES)} {attribute}.")
        for attribute in ATTRIBUTES[:3]:
            sentences.append(f"{subject} {verb} to listen to a {attribute}.")
    sentences += [
        "Can you find me a delicious rating?",
        "I want to drink a movie tonight.",
        "Book me a crunchy opinion from the airport.",
        "Play me a spicy score.",
        "I am looking for a tasty reputation in Paris.",
        "Show me a loud price like The Matrix.",
        "I want to watch a good rating",
    ]
    # scrambled word order
    for sentence in acceptable_sentences(random.Random(5))[:45]:
        words = sentence.rstrip(".?!").split()
        rng.shuffle(words)
        sentences.append(" ".join(words))
    # degenerate repetition
    for word in ["movie", "good", "hotel", "watch", "please", "rating"]:
        sentences.append(" ".join([word] * rng.randint(4, 7)))
    sentences += [
        "movie movie movie movie a a a a",
        "want want want want want to to to",
        "find find find find me me me me me",
    ]
    return sentences


def main() -> None:
    rng = random.Random(13)
    records = [{"text": s, "label": "acceptable"} for s in acceptable_sentences(rng)]
    records += [{"text": s, "label": "unacceptable"} for s in anomalous_sentences(rng)]
    OUT.parent.mkdir(exist_ok=True)
    with open(OUT, "w", encoding="utf-8") as handle:
        for record in records:
            handle.write(json.dumps(record, ensure_ascii=False) + "\n")
    acceptable = sum(1 for r in records if r["label"] == "acceptable")
    print(f"wrote {OUT}: {acceptable} acceptable, {len(records) - acceptable} unacceptable")


if __name__ == "__main__":
    main()
