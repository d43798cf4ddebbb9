"""Per-position teacher statistics.

A teacher signal stores, for every position of a sample, the teacher's
probability of the annotated token/tag (p_gold) and the Shannon entropy of
the teacher's output distribution normalized by log(vocab size). These two
numbers are the sufficient statistics for all training weights; full
distributions are optional and only needed for distillation.

Signal files are JSON-lines: one header record, then one record per sample
in corpus order. Floats are serialized with full round-trip precision.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple, Sequence

import numpy as np

from .align import EncodedCorpus
from .corpus import Corpus

SEQ2EDIT = "seq2edit"
SEQ2SEQ = "seq2seq"

_TOL = 1e-6


class PositionStat(NamedTuple):
    p_gold: float
    entropy_norm: float


def entropy_norm(dist: Sequence[float] | np.ndarray, vocab_size: int) -> float:
    """Shannon entropy of a distribution divided by log(vocab_size).

    Natural logs; 0*log 0 is taken as 0. The ratio lies in [0, 1] and is
    invariant to the log base.
    """
    if vocab_size < 2:
        raise ValueError(f"vocab_size must be at least 2, got {vocab_size}")
    p = np.asarray(dist, dtype=np.float64)
    if p.shape != (vocab_size,):
        raise ValueError(f"distribution length {p.shape} != vocab_size {vocab_size}")
    if np.any(p < 0):
        raise ValueError("distribution has negative entries")
    total = float(p.sum())
    if abs(total - 1.0) > _TOL:
        raise ValueError(f"distribution sums to {total}, not 1")
    nz = p[p > 0]
    h = float(-(nz * np.log(nz)).sum())
    return min(max(h / math.log(vocab_size), 0.0), 1.0)


@dataclass
class TeacherSignal:
    sample_id: int
    vocab_size: int
    p_gold: np.ndarray  # (positions,)
    entropy: np.ndarray  # (positions,) normalized entropy
    full_dist: np.ndarray | None = None  # (positions, vocab_size)

    @property
    def positions(self) -> list[PositionStat]:
        return [PositionStat(float(p), float(h)) for p, h in zip(self.p_gold, self.entropy)]

    def __len__(self) -> int:
        return len(self.p_gold)


@dataclass
class SignalFile:
    manner: str
    vocab_size: int
    vocab_hash: str
    has_full_dist: bool
    signals: list[TeacherSignal]
    positions_include_eos: bool = False

    def __iter__(self):
        return iter(self.signals)

    def __len__(self) -> int:
        return len(self.signals)


def save_signals(sig: SignalFile, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        header = {
            "format": "teacher-signals/v1",
            "vocab_size": sig.vocab_size,
            "vocab_hash": sig.vocab_hash,
            "manner": sig.manner,
            "has_full_dist": sig.has_full_dist,
        }
        if sig.manner == SEQ2SEQ:
            header["positions_include_eos"] = sig.positions_include_eos
        fh.write(json.dumps(header) + "\n")
        for s in sig.signals:
            rec: dict = {
                "id": s.sample_id,
                "p_gold": [float(x) for x in s.p_gold],
                "entropy_norm": [float(x) for x in s.entropy],
            }
            if sig.has_full_dist:
                if s.full_dist is None:
                    raise ValueError(f"sample {s.sample_id}: header promises full_dist but record has none")
                rec["dist"] = [[float(x) for x in row] for row in s.full_dist]
            fh.write(json.dumps(rec) + "\n")


def load_signals(path: str | Path) -> SignalFile:
    with open(path, "r", encoding="utf-8") as fh:
        header = json.loads(fh.readline())
        if header.get("format") != "teacher-signals/v1":
            raise ValueError(f"{path}: not a teacher-signal file")
        signals = []
        for line in fh:
            line = line.strip()
            if not line:
                continue
            rec = json.loads(line)
            dist = None
            if "dist" in rec:
                dist = np.asarray(rec["dist"], dtype=np.float64)
            signals.append(
                TeacherSignal(
                    sample_id=rec["id"],
                    vocab_size=header["vocab_size"],
                    p_gold=np.asarray(rec["p_gold"], dtype=np.float64),
                    entropy=np.asarray(rec["entropy_norm"], dtype=np.float64),
                    full_dist=dist,
                )
            )
    return SignalFile(
        manner=header["manner"],
        vocab_size=header["vocab_size"],
        vocab_hash=header["vocab_hash"],
        has_full_dist=header["has_full_dist"],
        signals=signals,
        positions_include_eos=header.get("positions_include_eos", False),
    )


@dataclass
class ValidationReport:
    violations: list[str]

    @property
    def ok(self) -> bool:
        return not self.violations


def _expected_positions(sig: SignalFile, corpus: EncodedCorpus | Corpus) -> list[tuple[int, int]]:
    if sig.manner == SEQ2EDIT:
        if not isinstance(corpus, EncodedCorpus):
            raise TypeError("seq2edit signals validate against an encoded corpus")
        return [(s.sample_id, len(s.tag_ids)) for s in corpus]
    if not isinstance(corpus, Corpus):
        raise TypeError("seq2seq signals validate against a parallel corpus")
    extra = 1 if sig.positions_include_eos else 0
    return [(s.id, len(s.target) + extra) for s in corpus]


def validate_signals(sig: SignalFile, corpus: EncodedCorpus | Corpus) -> ValidationReport:
    """Check a signal file against its corpus: ids, lengths, ranges, consistency."""
    v: list[str] = []
    expected = _expected_positions(sig, corpus)
    if len(sig.signals) != len(expected):
        v.append(f"signal count {len(sig.signals)} != corpus size {len(expected)}")
    if isinstance(corpus, EncodedCorpus) and sig.vocab_hash != corpus.vocab_hash:
        v.append(f"vocab hash {sig.vocab_hash} != corpus vocab hash {corpus.vocab_hash}")
    for s, (want_id, want_len) in zip(sig.signals, expected):
        tag = f"sample {s.sample_id}"
        if s.sample_id != want_id:
            v.append(f"{tag}: id out of order (expected {want_id})")
        if len(s.p_gold) != want_len or len(s.entropy) != want_len:
            v.append(f"{tag}: {len(s.p_gold)} positions, expected {want_len}")
        for i, (p, h) in enumerate(zip(s.p_gold, s.entropy)):
            if not (0.0 <= p <= 1.0) or not math.isfinite(p):
                v.append(f"{tag} position {i}: p_gold {p} outside [0,1]")
            if not (0.0 <= h <= 1.0) or not math.isfinite(h):
                v.append(f"{tag} position {i}: entropy_norm {h} outside [0,1]")
        if sig.has_full_dist and s.full_dist is None:
            v.append(f"{tag}: missing full distribution")
        if s.full_dist is not None:
            if s.full_dist.shape != (len(s.p_gold), sig.vocab_size):
                v.append(f"{tag}: full_dist shape {s.full_dist.shape} unexpected")
            else:
                for i, row in enumerate(s.full_dist):
                    if np.any(row < 0) or abs(float(row.sum()) - 1.0) > _TOL:
                        v.append(f"{tag} position {i}: full_dist not a distribution")
                        continue
                    h = entropy_norm(row, sig.vocab_size)
                    if abs(h - float(s.entropy[i])) > _TOL:
                        v.append(f"{tag} position {i}: entropy_norm {s.entropy[i]} != recomputed {h}")
    return ValidationReport(violations=v)


def generate_signals(
    model,
    corpus: EncodedCorpus,
    want_full_dist: bool = False,
) -> SignalFile:
    """Run a trained tagger over the corpus and record per-slot statistics.

    ``model`` is a geckit.model.Tagger whose tag vocab hash must match the
    corpus. p_gold is the softmax probability of the annotated tag; entropy
    is normalized by log of the tag vocab size.
    """
    if model.tag_vocab.content_hash() != corpus.vocab_hash:
        raise ValueError(
            f"model tag vocab hash {model.tag_vocab.content_hash()} "
            f"!= corpus vocab hash {corpus.vocab_hash}"
        )
    k = len(model.tag_vocab)
    log_k = math.log(k)
    signals = []
    for sample in corpus:
        probs = model.predict_probs(sample.source)  # (m+1, k)
        gold = np.asarray(sample.tag_ids, dtype=np.intp)
        p_gold = probs[np.arange(len(gold)), gold]
        with np.errstate(divide="ignore", invalid="ignore"):
            plogp = np.where(probs > 0, probs * np.log(probs), 0.0)
        ent = np.clip(-plogp.sum(axis=1) / log_k, 0.0, 1.0)
        signals.append(
            TeacherSignal(
                sample_id=sample.sample_id,
                vocab_size=k,
                p_gold=np.clip(p_gold, 0.0, 1.0),
                entropy=ent,
                full_dist=probs if want_full_dist else None,
            )
        )
    return SignalFile(
        manner=SEQ2EDIT,
        vocab_size=k,
        vocab_hash=corpus.vocab_hash,
        has_full_dist=want_full_dist,
        signals=signals,
    )
