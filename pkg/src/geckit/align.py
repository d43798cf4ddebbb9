"""Edit-tag alignment between source and target sentences.

A target sentence is expressed as one edit tag per source slot. Slot 0 is a
virtual sentence-start slot (insertions before the first token); slots 1..m
cover the source tokens. Tags:

    KEEP            emit the source token unchanged (start slot: emit nothing)
    DELETE          emit nothing
    REPLACE(t)      emit t instead of the source token
    APPEND(span)    emit the source token, then the span (start slot: span only)

``align_to_tags`` builds the minimal-cost tag sequence from a Levenshtein
dynamic program (match 0, substitute/delete/insert 1) with backtrace ties
broken match > substitute > delete > insert. Under that tie order an insert
run in the op sequence is always preceded by a match (or sits before the
first source token), so every insertion attaches to a KEEP slot or the start
slot and the conversion to tags is total. Insert runs longer than ``a_max``
raise SpanTooLongError.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from .corpus import Corpus, ParallelSample
from .util import hash_lines

DEFAULT_A_MAX = 4

KEEP = "KEEP"
DELETE = "DELETE"
REPLACE = "REPLACE"
APPEND = "APPEND"


class SpanTooLongError(ValueError):
    """An insertion run exceeded the configured APPEND span cap."""

    def __init__(self, sample_id: int, span_len: int, a_max: int):
        super().__init__(
            f"sample {sample_id}: insertion run of {span_len} tokens exceeds APPEND cap {a_max}"
        )
        self.sample_id = sample_id
        self.span_len = span_len
        self.a_max = a_max


@dataclass(frozen=True)
class EditTag:
    kind: str
    payload: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if self.kind not in (KEEP, DELETE, REPLACE, APPEND):
            raise ValueError(f"unknown tag kind {self.kind!r}")
        if self.kind in (KEEP, DELETE) and self.payload:
            raise ValueError(f"{self.kind} takes no payload")
        if self.kind == REPLACE and (len(self.payload) != 1 or not self.payload[0]):
            raise ValueError("REPLACE takes exactly one non-empty token")
        if self.kind == APPEND and (not self.payload or any(not t for t in self.payload)):
            raise ValueError("APPEND takes a non-empty token span")

    def render(self) -> str:
        if self.kind == KEEP:
            return "$KEEP"
        if self.kind == DELETE:
            return "$DELETE"
        if self.kind == REPLACE:
            return "$REPLACE_" + self.payload[0]
        return "$APPEND_" + " ".join(self.payload)

    def __str__(self) -> str:  # pragma: no cover - debugging nicety
        return self.render()


TAG_KEEP = EditTag(KEEP)
TAG_DELETE = EditTag(DELETE)


def replace(token: str) -> EditTag:
    return EditTag(REPLACE, (token,))


def append(span: Iterable[str]) -> EditTag:
    return EditTag(APPEND, tuple(span))


def parse_tag(rendered: str) -> EditTag:
    if rendered == "$KEEP":
        return TAG_KEEP
    if rendered == "$DELETE":
        return TAG_DELETE
    if rendered.startswith("$REPLACE_"):
        return replace(rendered[len("$REPLACE_"):])
    if rendered.startswith("$APPEND_"):
        return append(rendered[len("$APPEND_"):].split(" "))
    raise ValueError(f"cannot parse tag {rendered!r}")


@dataclass(frozen=True)
class TagSequence:
    """Edit tags for one sample: start slot + one slot per source token."""

    sample_id: int
    tags: tuple[EditTag, ...]

    def __post_init__(self) -> None:
        if len(self.tags) < 1:
            raise ValueError("tag sequence needs at least the start slot")
        if self.tags[0].kind not in (KEEP, APPEND):
            raise ValueError(f"start slot must be KEEP or APPEND, got {self.tags[0].kind}")

    def __len__(self) -> int:
        return len(self.tags)


# Backtrace op codes.
_MATCH, _SUB, _DEL, _INS = 0, 1, 2, 3


def _levenshtein_ops(source: tuple[str, ...], target: tuple[str, ...]) -> list[tuple[int, int]]:
    """Minimal edit script as (op, target_index) pairs in left-to-right order.

    target_index is the 0-based index of the target token consumed by the op
    (-1 for deletions). Ties in the backtrace are broken in the fixed order
    match > substitute > delete > insert.
    """
    m, n = len(source), len(target)
    cost = [[0] * (n + 1) for _ in range(m + 1)]
    for i in range(1, m + 1):
        cost[i][0] = i
    for j in range(1, n + 1):
        cost[0][j] = j
    for i in range(1, m + 1):
        row, prev = cost[i], cost[i - 1]
        si = source[i - 1]
        for j in range(1, n + 1):
            sub = prev[j - 1] + (0 if si == target[j - 1] else 1)
            dele = prev[j] + 1
            ins = row[j - 1] + 1
            row[j] = sub if sub <= dele and sub <= ins else (dele if dele <= ins else ins)

    ops: list[tuple[int, int]] = []
    i, j = m, n
    while i > 0 or j > 0:
        c = cost[i][j]
        if i > 0 and j > 0 and source[i - 1] == target[j - 1] and c == cost[i - 1][j - 1]:
            ops.append((_MATCH, j - 1))
            i, j = i - 1, j - 1
        elif i > 0 and j > 0 and c == cost[i - 1][j - 1] + 1:
            ops.append((_SUB, j - 1))
            i, j = i - 1, j - 1
        elif i > 0 and c == cost[i - 1][j] + 1:
            ops.append((_DEL, -1))
            i = i - 1
        else:
            ops.append((_INS, j - 1))
            j = j - 1
    ops.reverse()
    return ops


def align_to_tags(sample: ParallelSample, a_max: int = DEFAULT_A_MAX) -> TagSequence:
    """Convert a sentence pair to its edit-tag sequence (length m+1)."""
    ops = _levenshtein_ops(sample.source, sample.target)
    tags: list[EditTag] = [TAG_KEEP]
    pending: list[str] = []

    def attach_pending() -> None:
        if not pending:
            return
        if len(pending) > a_max:
            raise SpanTooLongError(sample.id, len(pending), a_max)
        base = tags[-1]
        # The tie order guarantees the carrier slot is KEEP (or the start slot).
        if base.kind != KEEP:
            raise AssertionError(f"sample {sample.id}: insert run after {base.kind} slot")
        tags[-1] = append(pending)
        pending.clear()

    for op, tj in ops:
        if op == _INS:
            pending.append(sample.target[tj])
            continue
        attach_pending()
        if op == _MATCH:
            tags.append(TAG_KEEP)
        elif op == _SUB:
            tags.append(replace(sample.target[tj]))
        else:
            tags.append(TAG_DELETE)
    attach_pending()
    return TagSequence(sample_id=sample.id, tags=tuple(tags))


def apply_tags(source: tuple[str, ...] | list[str], tags: TagSequence) -> tuple[str, ...]:
    """Apply an edit-tag sequence to source tokens, producing the corrected sentence."""
    if len(tags) != len(source) + 1:
        raise ValueError(f"tag sequence length {len(tags)} != source length {len(source)} + 1")
    out: list[str] = []
    start = tags.tags[0]
    if start.kind == APPEND:
        out.extend(start.payload)
    for tok, tag in zip(source, tags.tags[1:]):
        if tag.kind == KEEP:
            out.append(tok)
        elif tag.kind == DELETE:
            continue
        elif tag.kind == REPLACE:
            out.append(tag.payload[0])
        else:
            out.append(tok)
            out.extend(tag.payload)
    return tuple(out)


@dataclass
class TagVocab:
    """Capped tag inventory; index 0 is always KEEP, DELETE always present."""

    tags: list[EditTag]
    counts: Counter | None = None
    _index: dict[EditTag, int] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        if len(self.tags) < 2 or self.tags[0] != TAG_KEEP or TAG_DELETE not in self.tags:
            raise ValueError("vocab must start with KEEP and contain DELETE")
        self._index = {t: i for i, t in enumerate(self.tags)}
        if len(self._index) != len(self.tags):
            raise ValueError("duplicate tags in vocab")

    def __len__(self) -> int:
        return len(self.tags)

    def __contains__(self, tag: EditTag) -> bool:
        return tag in self._index

    def index(self, tag: EditTag) -> int:
        return self._index[tag]

    def rendered(self) -> list[str]:
        return [t.render() for t in self.tags]

    def content_hash(self) -> str:
        return hash_lines(self.rendered())

    def save(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump({"tags": self.rendered(), "hash": self.content_hash()}, fh, ensure_ascii=False)
            fh.write("\n")

    @classmethod
    def load(cls, path: str | Path) -> "TagVocab":
        with open(path, "r", encoding="utf-8") as fh:
            obj = json.load(fh)
        vocab = cls(tags=[parse_tag(r) for r in obj["tags"]])
        if obj.get("hash") != vocab.content_hash():
            raise ValueError(f"{path}: vocab hash mismatch (file corrupted or edited)")
        return vocab


def build_vocab(corpus: Corpus, cap: int, a_max: int = DEFAULT_A_MAX) -> TagVocab:
    """Build the tag vocabulary from corpus alignments.

    KEEP and DELETE are always included; remaining slots go to the most
    frequent token-dependent tags, ties broken by rendered string.
    """
    if cap < 2:
        raise ValueError(f"cap must be at least 2, got {cap}")
    counts: Counter = Counter()
    for sample in corpus:
        for tag in align_to_tags(sample, a_max=a_max).tags:
            counts[tag] += 1
    candidates = [t for t in counts if t.kind in (REPLACE, APPEND)]
    candidates.sort(key=lambda t: (-counts[t], t.render()))
    tags = [TAG_KEEP, TAG_DELETE] + candidates[: max(0, cap - 2)]
    return TagVocab(tags=tags, counts=counts)


DROP_SAMPLE = "drop_sample"
MAP_KEEP = "map_keep"


@dataclass(frozen=True)
class EncodedSample:
    sample_id: int
    source: tuple[str, ...]
    tag_ids: tuple[int, ...]


@dataclass
class EncodeReport:
    total: int = 0
    kept: int = 0
    dropped: int = 0
    tags_mapped_to_keep: int = 0


@dataclass
class EncodedCorpus:
    name: str
    vocab_hash: str
    vocab_size: int
    samples: list[EncodedSample]

    def __len__(self) -> int:
        return len(self.samples)

    def __iter__(self):
        return iter(self.samples)


def encode_corpus(
    corpus: Corpus,
    vocab: TagVocab,
    oov_policy: str = DROP_SAMPLE,
    a_max: int = DEFAULT_A_MAX,
    precomputed: dict[int, tuple[EditTag, ...]] | None = None,
) -> tuple[EncodedCorpus, EncodeReport]:
    """Map corpus alignments onto vocab indices.

    Samples with out-of-vocab tags are dropped (drop_sample) or have those
    tags mapped to KEEP (map_keep, lossy). Sample ids are preserved from the
    source corpus either way. ``precomputed`` may supply ready tag sequences
    by sample id (e.g. from a parallel alignment pass).
    """
    if oov_policy not in (DROP_SAMPLE, MAP_KEEP):
        raise ValueError(f"unknown oov policy {oov_policy!r}")
    report = EncodeReport(total=len(corpus))
    keep_id = vocab.index(TAG_KEEP)
    encoded: list[EncodedSample] = []
    for sample in corpus:
        if precomputed is not None and sample.id in precomputed:
            tags = precomputed[sample.id]
        else:
            tags = align_to_tags(sample, a_max=a_max).tags
        if oov_policy == DROP_SAMPLE and any(t not in vocab for t in tags):
            report.dropped += 1
            continue
        ids = []
        for t in tags:
            if t in vocab:
                ids.append(vocab.index(t))
            else:
                ids.append(keep_id)
                report.tags_mapped_to_keep += 1
        encoded.append(EncodedSample(sample_id=sample.id, source=sample.source, tag_ids=tuple(ids)))
        report.kept += 1
    return EncodedCorpus(corpus.name, vocab.content_hash(), len(vocab), encoded), report


def save_encoded(corpus: EncodedCorpus, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        header = {
            "format": "tagged-corpus/v1",
            "name": corpus.name,
            "vocab_hash": corpus.vocab_hash,
            "vocab_size": corpus.vocab_size,
        }
        fh.write(json.dumps(header, ensure_ascii=False) + "\n")
        for s in corpus.samples:
            rec = {"id": s.sample_id, "source": list(s.source), "tags": list(s.tag_ids)}
            fh.write(json.dumps(rec, ensure_ascii=False) + "\n")


def load_encoded(path: str | Path) -> EncodedCorpus:
    with open(path, "r", encoding="utf-8") as fh:
        header = json.loads(fh.readline())
        if header.get("format") != "tagged-corpus/v1":
            raise ValueError(f"{path}: not a tagged-corpus file")
        samples = []
        for line in fh:
            line = line.strip()
            if not line:
                continue
            rec = json.loads(line)
            samples.append(
                EncodedSample(
                    sample_id=rec["id"], source=tuple(rec["source"]), tag_ids=tuple(rec["tags"])
                )
            )
    return EncodedCorpus(header.get("name", Path(path).stem), header["vocab_hash"], header["vocab_size"], samples)
