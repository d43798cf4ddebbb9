"""Seq2Edit signal export: adapt an external tagger onto a toolkit tag vocab.

The external tagger exposes its own tag inventory as rendered strings plus
a per-slot probability distribution. External tags are mapped onto the
toolkit vocabulary by exact rendered string; probability mass of unmappable
external tags forms an OTHER bucket that never contributes to p_gold, while
entropies are computed over the full external distribution before any
folding, normalized by log of the external inventory size. Export aborts
when fewer than 90% of the corpus' gold tag types are mappable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Protocol

import numpy as np

from .formats import EncodedCorpusFile, SignalRecord, TagVocabFile

MIN_MAPPABLE_TYPE_FRACTION = 0.9


class EditTagger(Protocol):
    def tag_inventory(self) -> list[str]: ...

    def predict_dist(self, source: tuple[str, ...]) -> np.ndarray: ...


@dataclass
class MappingReport:
    external_size: int
    toolkit_size: int
    mappable_gold_types: int
    gold_types: int
    unmappable: list[str] = field(default_factory=list)
    bijective: bool = False

    @property
    def coverage(self) -> float:
        return self.mappable_gold_types / self.gold_types if self.gold_types else 1.0


class MappingError(ValueError):
    def __init__(self, report: MappingReport):
        missing = ", ".join(report.unmappable[:10])
        super().__init__(
            f"only {report.mappable_gold_types}/{report.gold_types} corpus tag types map onto the "
            f"external inventory (need >= {MIN_MAPPABLE_TYPE_FRACTION:.0%}); unmappable: {missing}"
        )
        self.report = report


def build_mapping(
    tagger: EditTagger, tag_vocab: TagVocabFile, corpus: EncodedCorpusFile
) -> tuple[np.ndarray, MappingReport]:
    """toolkit index -> external index (-1 where unmappable), plus a report."""
    inventory = tagger.tag_inventory()
    ext_index = {r: i for i, r in enumerate(inventory)}
    mapping = np.full(len(tag_vocab.tags), -1, dtype=np.intp)
    for i, render in enumerate(tag_vocab.tags):
        mapping[i] = ext_index.get(render, -1)

    gold_types = sorted({tid for s in corpus.samples for tid in s.tag_ids})
    unmappable = [tag_vocab.tags[t] for t in gold_types if mapping[t] < 0]
    report = MappingReport(
        external_size=len(inventory),
        toolkit_size=len(tag_vocab.tags),
        mappable_gold_types=len(gold_types) - len(unmappable),
        gold_types=len(gold_types),
        unmappable=unmappable,
        bijective=(
            len(inventory) == len(tag_vocab.tags)
            and bool(np.all(mapping >= 0))
            and len(set(mapping.tolist())) == len(tag_vocab.tags)
        ),
    )
    return mapping, report


def export_seq2edit_signals(
    tagger: EditTagger,
    corpus: EncodedCorpusFile,
    tag_vocab: TagVocabFile,
    want_full_dist: bool = False,
    batch_size: int = 64,
) -> tuple[list[SignalRecord], MappingReport, bool]:
    """Signal records in corpus order; returns (records, report, emitted_full_dist).

    Full distributions are only emitted when the inventories map bijectively,
    otherwise the folded distribution could not reproduce the stored
    statistics.
    """
    if tag_vocab.hash != corpus.vocab_hash:
        raise ValueError("tag vocab does not match the encoded corpus")
    mapping, report = build_mapping(tagger, tag_vocab, corpus)
    if report.coverage < MIN_MAPPABLE_TYPE_FRACTION:
        raise MappingError(report)
    emit_dist = want_full_dist and report.bijective
    k_ext = report.external_size
    if k_ext < 2:
        raise ValueError("external tagger needs an inventory of at least 2 tags")
    log_k = math.log(k_ext)

    records: list[SignalRecord] = []
    for start in range(0, len(corpus.samples), batch_size):
        for s in corpus.samples[start : start + batch_size]:
            dist = np.asarray(tagger.predict_dist(s.source), dtype=np.float64)
            if dist.shape != (len(s.tag_ids), k_ext):
                raise ValueError(
                    f"sample {s.sample_id}: tagger produced shape {dist.shape}, "
                    f"expected {(len(s.tag_ids), k_ext)}"
                )
            gold_ext = mapping[np.asarray(s.tag_ids, dtype=np.intp)]
            p_gold = np.where(gold_ext >= 0, dist[np.arange(len(gold_ext)), np.maximum(gold_ext, 0)], 0.0)
            with np.errstate(divide="ignore", invalid="ignore"):
                plogp = np.where(dist > 0, dist * np.log(dist), 0.0)
            entropy = np.clip(-plogp.sum(axis=1) / log_k, 0.0, 1.0)
            full = None
            if emit_dist:
                full = np.zeros((len(s.tag_ids), len(tag_vocab.tags)))
                full[:, :] = dist[:, mapping]
            records.append(
                SignalRecord(
                    sample_id=s.sample_id,
                    p_gold=np.clip(p_gold, 0.0, 1.0),
                    entropy_norm=entropy,
                    dist=full,
                )
            )
    return records, report, emit_dist


@dataclass
class StubTagger:
    """Test double with a fixed inventory and rule-driven distributions."""

    inventory: list[str]
    peak: float = 0.7
    keep_index: int = 0

    def tag_inventory(self) -> list[str]:
        return self.inventory

    def predict_dist(self, source: tuple[str, ...]) -> np.ndarray:
        k = len(self.inventory)
        rest = (1.0 - self.peak) / (k - 1) if k > 1 else 0.0
        dist = np.full((len(source) + 1, k), rest)
        dist[:, self.keep_index] = self.peak
        return dist


@dataclass
class UniformTagger:
    inventory: list[str]

    def tag_inventory(self) -> list[str]:
        return self.inventory

    def predict_dist(self, source: tuple[str, ...]) -> np.ndarray:
        k = len(self.inventory)
        return np.full((len(source) + 1, k), 1.0 / k)
