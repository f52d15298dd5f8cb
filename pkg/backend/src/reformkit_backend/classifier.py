"""Linguistic-acceptability classifier.

A logistic model over hashed word unigram/bigram counts, trained on the
bundled labeled corpus of acceptable requests and anomalous sentences
(semantic mismatches, scrambled word order, degenerate repetition).
"""

from __future__ import annotations

import json
import zlib
from dataclasses import dataclass
from pathlib import Path

import torch
import torch.nn as nn

from .textproc import tokenize

FEATURE_BITS = 14
FEATURE_DIM = 1 << FEATURE_BITS


def _bucket(key: str) -> int:
    return zlib.crc32(key.encode("utf-8")) & (FEATURE_DIM - 1)


def featurize(text: str) -> torch.Tensor:
    vector = torch.zeros(FEATURE_DIM)
    tokens = tokenize(text)
    for token in tokens:
        vector[_bucket("u:" + token)] += 1.0
    for a, b in zip(tokens, tokens[1:]):
        vector[_bucket(f"b:{a}_{b}")] += 1.0
    return vector


@dataclass
class AcceptabilityClassifier:
    linear: nn.Linear
    threshold: float = 0.5

    @torch.no_grad()
    def score(self, text: str) -> float:
        return float(torch.sigmoid(self.linear(featurize(text))))

    def acceptable(self, text: str) -> tuple[bool, float]:
        score = self.score(text)
        return score >= self.threshold, score


def load_labeled_corpus(path: str | Path) -> list[tuple[str, int]]:
    examples = []
    with open(path, encoding="utf-8") as handle:
        for line in handle:
            line = line.strip()
            if not line:
                continue
            record = json.loads(line)
            label = 1 if record["label"] == "acceptable" else 0
            examples.append((record["text"], label))
    return examples


def train_classifier(
    examples: list[tuple[str, int]],
    epochs: int = 300,
    learning_rate: float = 0.05,
    seed: int = 0,
) -> AcceptabilityClassifier:
    if not examples:
        raise ValueError("no labeled examples")
    torch.manual_seed(seed)
    features = torch.stack([featurize(text) for text, _ in examples])
    labels = torch.tensor([float(label) for _, label in examples])
    linear = nn.Linear(FEATURE_DIM, 1)
    optimizer = torch.optim.Adam(linear.parameters(), lr=learning_rate)
    criterion = nn.BCEWithLogitsLoss()
    for _ in range(epochs):
        logits = linear(features).squeeze(-1)
        loss = criterion(logits, labels) + 1e-4 * linear.weight.pow(2).sum()
        optimizer.zero_grad()
        loss.backward()
        optimizer.step()
    linear.eval()
    return AcceptabilityClassifier(linear=linear)


def save_classifier(classifier: AcceptabilityClassifier, path: str | Path) -> None:
    torch.save(
        {"state_dict": classifier.linear.state_dict(), "threshold": classifier.threshold}, path
    )


def load_classifier(path: str | Path) -> AcceptabilityClassifier:
    payload = torch.load(path, map_location="cpu", weights_only=True)
    linear = nn.Linear(FEATURE_DIM, 1)
    linear.load_state_dict(payload["state_dict"])
    linear.eval()
    return AcceptabilityClassifier(linear=linear, threshold=float(payload["threshold"]))
