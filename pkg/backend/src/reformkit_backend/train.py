"""Training with cross-validated fold metrics.

Each triad becomes one training example: source = original utterance plus a
separator and the canonical type string (omitted for the unguided ablation),
target = the reformulated utterance.  Folds are evaluated with greedy
decoding and an overlap F1 on the longest common subsequence.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field, replace
from pathlib import Path

import torch
import torch.nn as nn

from .data import Triad
from .model import (
    ARCH_PRESETS,
    BOS,
    EOS,
    PAD,
    DecodingConfig,
    Seq2Seq,
    Vocab,
    decode,
    encode_source,
    encode_target,
    pad_batch,
)
from .textproc import GENERABLE_TYPES, rouge_l_f1, tokenize


@dataclass(frozen=True)
class TrainingConfig:
    base_model: str = "gru-small"
    domain: str = "hybrid"
    batch_size: int = 10
    folds: int = 5
    epochs: int = 12
    learning_rate: float = 2e-3
    max_len: int = 22
    seed: int = 0
    guided: bool = True
    decoding: DecodingConfig = field(default_factory=DecodingConfig)

    def __post_init__(self) -> None:
        if self.base_model not in ARCH_PRESETS:
            raise ValueError(f"unknown base model {self.base_model!r}")
        if self.folds < 2:
            raise ValueError("folds must be at least 2")
        if self.batch_size < 1 or self.epochs < 1:
            raise ValueError("batch_size and epochs must be positive")


@dataclass
class FittedModel:
    model: Seq2Seq
    vocab: Vocab
    cfg: TrainingConfig
    step_losses: list[float]

    def generate(
        self,
        utterance: str,
        type_name: str | None,
        decoding: DecodingConfig | None = None,
        seed_parts: tuple = (),
    ) -> tuple[str, float]:
        requested = type_name if self.cfg.guided else None
        return decode(
            self.model,
            self.vocab,
            utterance,
            requested,
            decoding or self.cfg.decoding,
            max_len=self.cfg.max_len + 2,
            seed_parts=seed_parts,
        )


@dataclass
class FoldResult:
    fold: int
    n_train: int
    n_validation: int
    validation_rouge_l: float
    first_loss: float
    last_loss: float
    state_dict: dict


@dataclass
class TrainingResult:
    artifact: FittedModel
    folds: list[FoldResult]

    @property
    def step_losses(self) -> list[float]:
        return self.artifact.step_losses

    def fold_scores(self) -> list[float]:
        return [f.validation_rouge_l for f in self.folds]


def _validate_triads(triads: list[Triad]) -> None:
    bad = sorted({t.type for t in triads} - set(GENERABLE_TYPES))
    if bad:
        raise ValueError(f"non-generable types in training data: {bad}")


def fit(triads: list[Triad], cfg: TrainingConfig) -> FittedModel:
    """Fit one model on the given triads; deterministic per config seed."""
    _validate_triads(triads)
    if not triads:
        raise ValueError("no training triads")
    torch.manual_seed(cfg.seed)
    vocab = Vocab.build([t.original for t in triads] + [t.reformulated for t in triads])
    embedding_size, hidden_size = ARCH_PRESETS[cfg.base_model]
    model = Seq2Seq(len(vocab), embedding_size, hidden_size)
    optimizer = torch.optim.Adam(model.parameters(), lr=cfg.learning_rate)
    criterion = nn.CrossEntropyLoss(ignore_index=PAD)
    examples = [
        (
            encode_source(vocab, t.original, t.type if cfg.guided else None, cfg.max_len),
            encode_target(vocab, t.reformulated, cfg.max_len),
        )
        for t in triads
    ]
    shuffler = random.Random(cfg.seed + 1)
    step_losses: list[float] = []
    model.train()
    for _ in range(cfg.epochs):
        shuffler.shuffle(examples)
        for start in range(0, len(examples), cfg.batch_size):
            chunk = examples[start : start + cfg.batch_size]
            source = pad_batch([s for s, _ in chunk])
            target_in = pad_batch([[BOS] + t for _, t in chunk])
            target_out = pad_batch([t + [EOS] for _, t in chunk])
            logits = model(source, target_in)
            loss = criterion(logits.reshape(-1, logits.shape[-1]), target_out.reshape(-1))
            optimizer.zero_grad()
            loss.backward()
            optimizer.step()
            step_losses.append(float(loss.detach()))
    return FittedModel(model=model, vocab=vocab, cfg=cfg, step_losses=step_losses)


def evaluate_fold(fitted: FittedModel, validation: list[Triad]) -> float:
    """Mean greedy-decoding overlap score against held-out reformulations."""
    greedy = DecodingConfig(mode="greedy")
    scores = []
    for triad in validation:
        text, _ = fitted.generate(triad.original, triad.type, decoding=greedy)
        scores.append(rouge_l_f1(tokenize(text), tokenize(triad.reformulated)))
    return sum(scores) / len(scores) if scores else 0.0


def train(triads: list[Triad], cfg: TrainingConfig) -> TrainingResult:
    """Cross-validate across folds, then fit the final artifact on all data.

    Raises ``ValueError`` when fewer triads than folds are supplied.
    """
    _validate_triads(triads)
    if len(triads) < cfg.folds:
        raise ValueError(f"need at least {cfg.folds} triads, got {len(triads)}")
    order = list(triads)
    random.Random(cfg.seed).shuffle(order)
    folds: list[FoldResult] = []
    for fold in range(cfg.folds):
        validation = [t for i, t in enumerate(order) if i % cfg.folds == fold]
        training = [t for i, t in enumerate(order) if i % cfg.folds != fold]
        fitted = fit(training, replace(cfg, seed=cfg.seed + fold))
        folds.append(
            FoldResult(
                fold=fold,
                n_train=len(training),
                n_validation=len(validation),
                validation_rouge_l=evaluate_fold(fitted, validation),
                first_loss=fitted.step_losses[0],
                last_loss=fitted.step_losses[-1],
                state_dict={k: v.clone() for k, v in fitted.model.state_dict().items()},
            )
        )
    artifact = fit(order, cfg)
    return TrainingResult(artifact=artifact, folds=folds)


def save_artifact(fitted: FittedModel, path: str | Path) -> None:
    torch.save(
        {
            "itos": fitted.vocab.itos,
            "state_dict": fitted.model.state_dict(),
            "config": {
                "base_model": fitted.cfg.base_model,
                "domain": fitted.cfg.domain,
                "guided": fitted.cfg.guided,
                "max_len": fitted.cfg.max_len,
                "decoding": {
                    "mode": fitted.cfg.decoding.mode,
                    "top_p": fitted.cfg.decoding.top_p,
                    "top_k": fitted.cfg.decoding.top_k,
                    "seed": fitted.cfg.decoding.seed,
                },
            },
        },
        path,
    )


def load_artifact(path: str | Path) -> FittedModel:
    payload = torch.load(path, map_location="cpu", weights_only=True)
    vocab = Vocab(itos=list(payload["itos"]))
    raw_cfg = payload["config"]
    cfg = TrainingConfig(
        base_model=raw_cfg["base_model"],
        domain=raw_cfg["domain"],
        guided=raw_cfg["guided"],
        max_len=raw_cfg["max_len"],
        decoding=DecodingConfig(**raw_cfg["decoding"]),
    )
    embedding_size, hidden_size = ARCH_PRESETS[cfg.base_model]
    model = Seq2Seq(len(vocab), embedding_size, hidden_size)
    model.load_state_dict(payload["state_dict"])
    model.eval()
    return FittedModel(model=model, vocab=vocab, cfg=cfg, step_losses=[])
