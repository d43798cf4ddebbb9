"""Seq2Seq signal export via teacher forcing.

For each sample the decoder is fed the source plus the gold prefix; every
step records the probability of the annotated next token, and a final step
records the probability of end-of-sequence, so a target of n tokens yields
n+1 positions (declared in the signal header via positions_include_eos).
Entropies cover the teacher's full output vocabulary, normalized by
log(vocab size). Teachers whose vocabulary misses corpus tokens are
reported; those positions carry p_gold = 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Protocol, Sequence

import numpy as np

from .formats import SignalRecord, hash_lines


class Seq2SeqTeacher(Protocol):
    """A pretrained autoregressive corrector queried with teacher forcing."""

    def vocab(self) -> list[str]: ...

    def eos(self) -> str: ...

    def next_dist(self, source: Sequence[str], prefix: Sequence[str]) -> np.ndarray: ...


@dataclass
class TokenizerReport:
    unknown_tokens: dict[str, int] = field(default_factory=dict)
    positions_zeroed: int = 0

    @property
    def clean(self) -> bool:
        return not self.unknown_tokens


def validate_teacher(teacher: Seq2SeqTeacher) -> None:
    v = teacher.vocab()
    if len(v) < 2:
        raise ValueError(f"teacher vocabulary has {len(v)} tokens; need at least 2")
    if teacher.eos() not in v:
        raise ValueError("teacher vocabulary must contain its end-of-sequence token")
    if len(set(v)) != len(v):
        raise ValueError("teacher vocabulary has duplicate tokens")


def teacher_vocab_hash(teacher: Seq2SeqTeacher) -> str:
    return hash_lines(teacher.vocab())


def export_seq2seq_signals(
    teacher: Seq2SeqTeacher,
    pairs: list[tuple[tuple[str, ...], tuple[str, ...]]],
    want_full_dist: bool = False,
    batch_size: int = 32,
) -> tuple[list[SignalRecord], TokenizerReport]:
    """Signal records in corpus order, teacher-forced over gold prefixes."""
    validate_teacher(teacher)
    vocab = teacher.vocab()
    index = {tok: i for i, tok in enumerate(vocab)}
    eos_id = index[teacher.eos()]
    k = len(vocab)
    log_k = math.log(k)
    report = TokenizerReport()

    records: list[SignalRecord] = []
    for start in range(0, len(pairs), batch_size):
        for offset, (source, target) in enumerate(pairs[start : start + batch_size]):
            sid = start + offset
            n = len(target)
            p_gold = np.zeros(n + 1)
            entropy = np.zeros(n + 1)
            dists = np.zeros((n + 1, k)) if want_full_dist else None
            for i in range(n + 1):
                dist = np.asarray(teacher.next_dist(source, target[:i]), dtype=np.float64)
                if dist.shape != (k,):
                    raise ValueError(f"sample {sid}: teacher returned shape {dist.shape}, expected ({k},)")
                gold = target[i] if i < n else teacher.eos()
                gid = index.get(gold)
                if gid is None:
                    report.unknown_tokens[gold] = report.unknown_tokens.get(gold, 0) + 1
                    report.positions_zeroed += 1
                    p_gold[i] = 0.0
                else:
                    p_gold[i] = dist[gid]
                with np.errstate(divide="ignore", invalid="ignore"):
                    plogp = np.where(dist > 0, dist * np.log(dist), 0.0)
                entropy[i] = min(max(-plogp.sum() / log_k, 0.0), 1.0)
                if dists is not None:
                    dists[i] = dist
            records.append(
                SignalRecord(
                    sample_id=sid,
                    p_gold=np.clip(p_gold, 0.0, 1.0),
                    entropy_norm=entropy,
                    dist=dists,
                )
            )
    _ = eos_id
    return records, report


@dataclass
class UniformSeq2SeqTeacher:
    """Stub teacher with uniform logits over a fixed vocabulary."""

    tokens: list[str]
    eos_token: str = "</s>"

    def __post_init__(self) -> None:
        if self.eos_token not in self.tokens:
            self.tokens = list(self.tokens) + [self.eos_token]

    def vocab(self) -> list[str]:
        return list(self.tokens)

    def eos(self) -> str:
        return self.eos_token

    def next_dist(self, source, prefix) -> np.ndarray:
        k = len(self.tokens)
        return np.full(k, 1.0 / k)


@dataclass
class EchoSeq2SeqTeacher:
    """Stub teacher that puts `peak` mass on copying the next source token.

    Behaves like a do-nothing corrector: the expected continuation after
    prefix Y_<i is the source token at the same offset (EOS once exhausted),
    with the remaining mass spread uniformly.
    """

    tokens: list[str]
    peak: float = 0.8
    eos_token: str = "</s>"

    def __post_init__(self) -> None:
        if self.eos_token not in self.tokens:
            self.tokens = list(self.tokens) + [self.eos_token]
        self._index = {t: i for i, t in enumerate(self.tokens)}

    def vocab(self) -> list[str]:
        return list(self.tokens)

    def eos(self) -> str:
        return self.eos_token

    def next_dist(self, source, prefix) -> np.ndarray:
        k = len(self.tokens)
        i = len(prefix)
        expected = source[i] if i < len(source) else self.eos_token
        hot = self._index.get(expected)
        if hot is None:
            return np.full(k, 1.0 / k)
        dist = np.full(k, (1.0 - self.peak) / (k - 1))
        dist[hot] = self.peak
        return dist
