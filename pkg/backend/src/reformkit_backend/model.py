"""Type-guided sequence-to-sequence model.

A compact GRU encoder-decoder with dot-product attention, trained from
scratch on triad data.  The target reformulation type is appended to the
source as ``<sep> <type>`` tokens; the unguided ablation omits them.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field

import torch
import torch.nn as nn

from .textproc import GENERABLE_TYPES, tokenize

PAD, BOS, EOS, UNK, SEP = 0, 1, 2, 3, 4
_SPECIALS = ["<pad>", "<bos>", "<eos>", "<unk>", "<sep>"]

ARCH_PRESETS: dict[str, tuple[int, int]] = {
    # identifier -> (embedding size, hidden size)
    "gru-small": (64, 96),
    "gru-tiny": (32, 48),
}


@dataclass
class Vocab:
    itos: list[str]
    stoi: dict[str, int] = field(init=False)

    def __post_init__(self) -> None:
        self.stoi = {w: i for i, w in enumerate(self.itos)}

    def __len__(self) -> int:
        return len(self.itos)

    def type_id(self, type_name: str) -> int:
        return self.stoi[f"<{type_name}>"]

    @classmethod
    def build(cls, texts: list[str]) -> "Vocab":
        words: set[str] = set()
        for text in texts:
            words.update(tokenize(text))
        itos = _SPECIALS + [f"<{t}>" for t in GENERABLE_TYPES] + sorted(words)
        return cls(itos=itos)


class Seq2Seq(nn.Module):
    def __init__(self, vocab_size: int, embedding_size: int, hidden_size: int):
        super().__init__()
        self.embedding = nn.Embedding(vocab_size, embedding_size, padding_idx=PAD)
        self.encoder = nn.GRU(embedding_size, hidden_size, batch_first=True)
        self.decoder = nn.GRU(embedding_size, hidden_size, batch_first=True)
        self.attention_combine = nn.Linear(2 * hidden_size, hidden_size)
        self.projection = nn.Linear(hidden_size, vocab_size)

    def forward(self, source: torch.Tensor, target_in: torch.Tensor) -> torch.Tensor:
        encoded, state = self.encoder(self.embedding(source))
        decoded, _ = self.decoder(self.embedding(target_in), state)
        scores = decoded @ encoded.transpose(1, 2)
        scores = scores + source.eq(PAD).unsqueeze(1) * -1e9
        context = torch.softmax(scores, dim=-1) @ encoded
        hidden = torch.tanh(self.attention_combine(torch.cat([decoded, context], dim=-1)))
        return self.projection(hidden)


def encode_source(vocab: Vocab, utterance: str, type_name: str | None, max_len: int) -> list[int]:
    ids = [vocab.stoi.get(w, UNK) for w in tokenize(utterance)][:max_len]
    if not ids:
        ids = [UNK]
    if type_name is not None:
        ids = ids + [SEP, vocab.type_id(type_name)]
    return ids


def encode_target(vocab: Vocab, utterance: str, max_len: int) -> list[int]:
    return [vocab.stoi.get(w, UNK) for w in tokenize(utterance)][:max_len]


def pad_batch(sequences: list[list[int]]) -> torch.Tensor:
    width = max(len(s) for s in sequences)
    return torch.tensor([s + [PAD] * (width - len(s)) for s in sequences], dtype=torch.long)


@dataclass(frozen=True)
class DecodingConfig:
    """Decoding strategy served by the backend.

    ``mode`` is one of ``greedy``, ``topk`` (integer ``top_k``), or
    ``nucleus`` (fractional ``top_p``); the default is nucleus with p=0.5.
    Sampling seeds are derived from the configured seed and the request, so
    identical requests decode identically.
    """

    mode: str = "nucleus"
    top_p: float = 0.5
    top_k: int = 10
    seed: int = 0

    def __post_init__(self) -> None:
        if self.mode not in ("greedy", "topk", "nucleus"):
            raise ValueError(f"unknown decoding mode {self.mode!r}")
        if not 0.0 < self.top_p <= 1.0:
            raise ValueError("top_p must lie in (0, 1]")
        if self.top_k < 1:
            raise ValueError("top_k must be at least 1")


def derive_seed(base: int, *parts: object) -> int:
    digest = hashlib.sha256(repr((base, parts)).encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big") % (2**63)


def _pick(logits: torch.Tensor, decoding: DecodingConfig, generator: torch.Generator) -> int:
    if decoding.mode == "greedy":
        return int(logits.argmax())
    probs = torch.softmax(logits, dim=-1)
    if decoding.mode == "topk":
        values, indices = probs.topk(min(decoding.top_k, probs.numel()))
        values = values / values.sum()
        choice = torch.multinomial(values, 1, generator=generator)
        return int(indices[choice])
    # nucleus: smallest prefix of the sorted distribution covering top_p
    sorted_probs, indices = probs.sort(descending=True)
    cumulative = sorted_probs.cumsum(dim=-1)
    keep = int(torch.searchsorted(cumulative, decoding.top_p).item()) + 1
    values = sorted_probs[:keep] / sorted_probs[:keep].sum()
    choice = torch.multinomial(values, 1, generator=generator)
    return int(indices[choice])


@torch.no_grad()
def decode(
    model: Seq2Seq,
    vocab: Vocab,
    utterance: str,
    type_name: str | None,
    decoding: DecodingConfig,
    max_len: int = 24,
    seed_parts: tuple = (),
) -> tuple[str, float]:
    """Decode one candidate; returns (text, score) with score the exponential
    of the mean token log-probability."""
    model.eval()
    source = torch.tensor([encode_source(vocab, utterance, type_name, max_len)])
    generator = torch.Generator().manual_seed(derive_seed(decoding.seed, *seed_parts))
    output = [BOS]
    log_probs: list[float] = []
    for _ in range(max_len):
        logits = model(source, torch.tensor([output]))[0, -1]
        logits[PAD] = -1e9
        logits[BOS] = -1e9
        token = _pick(logits, decoding, generator)
        step_log_probs = torch.log_softmax(logits, dim=-1)
        log_probs.append(float(step_log_probs[token]))
        if token == EOS:
            break
        output.append(token)
    words = [vocab.itos[i] for i in output[1:] if i not in (PAD, BOS, EOS, SEP)]
    words = [w for w in words if not (w.startswith("<") and w.endswith(">"))]
    text = " ".join(words)
    score = math.exp(sum(log_probs) / len(log_probs)) if log_probs else 0.0
    return text, score
