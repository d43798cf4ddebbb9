"""Readers and writers for the toolkit's published file formats.

Implemented from the format documentation alone (parallel TSV, tag/token
vocab JSON, encoded-corpus JSONL, signal JSONL, binary checkpoint); the
bridge deliberately does not import the toolkit package.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_U64 = 0xFFFFFFFFFFFFFFFF


def fnv1a64_hex(data: bytes) -> str:
    h = _FNV_OFFSET
    for b in data:
        h = ((h ^ b) * _FNV_PRIME) & _U64
    return f"{h:016x}"


def hash_lines(lines: list[str]) -> str:
    return fnv1a64_hex("\n".join(lines).encode("utf-8"))


def load_parallel(path: str | Path) -> list[tuple[tuple[str, ...], tuple[str, ...]]]:
    """Parallel TSV: one `source<TAB>target` pair per line, space-separated tokens."""
    pairs = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            parts = line.split("\t")
            if len(parts) != 2 or not parts[0]:
                raise ValueError(f"{path}:{lineno}: malformed parallel line")
            source = tuple(parts[0].split(" "))
            target = tuple(parts[1].split(" ")) if parts[1] else ()
            pairs.append((source, target))
    return pairs


@dataclass
class TagVocabFile:
    tags: list[str]
    hash: str


def load_tag_vocab(path: str | Path) -> TagVocabFile:
    obj = json.loads(Path(path).read_text(encoding="utf-8"))
    vocab = TagVocabFile(tags=list(obj["tags"]), hash=obj["hash"])
    if hash_lines(vocab.tags) != vocab.hash:
        raise ValueError(f"{path}: tag vocab hash mismatch")
    return vocab


@dataclass
class TokenVocabFile:
    tokens: list[str]
    hash: str

    def index(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for i, tok in enumerate(self.tokens):
            out.setdefault(tok, i)
        return out


def load_token_vocab(path: str | Path) -> TokenVocabFile:
    obj = json.loads(Path(path).read_text(encoding="utf-8"))
    vocab = TokenVocabFile(tokens=list(obj["tokens"]), hash=obj["hash"])
    if hash_lines(vocab.tokens) != vocab.hash:
        raise ValueError(f"{path}: token vocab hash mismatch")
    return vocab


@dataclass
class EncodedSampleRec:
    sample_id: int
    source: tuple[str, ...]
    tag_ids: tuple[int, ...]


@dataclass
class EncodedCorpusFile:
    name: str
    vocab_hash: str
    vocab_size: int
    samples: list[EncodedSampleRec]


def load_encoded_corpus(path: str | Path) -> EncodedCorpusFile:
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
                EncodedSampleRec(rec["id"], tuple(rec["source"]), tuple(rec["tags"]))
            )
    return EncodedCorpusFile(header.get("name", ""), header["vocab_hash"], header["vocab_size"], samples)


@dataclass
class SignalRecord:
    sample_id: int
    p_gold: np.ndarray
    entropy_norm: np.ndarray
    dist: np.ndarray | None = None


def write_signals(
    path: str | Path,
    manner: str,
    vocab_size: int,
    vocab_hash: str,
    records: list[SignalRecord],
    has_full_dist: bool,
    positions_include_eos: bool | None = None,
) -> None:
    """Signal JSONL, bit-compatible with the toolkit's teacher-signals/v1."""
    with open(path, "w", encoding="utf-8") as fh:
        header: dict = {
            "format": "teacher-signals/v1",
            "vocab_size": vocab_size,
            "vocab_hash": vocab_hash,
            "manner": manner,
            "has_full_dist": has_full_dist,
        }
        if positions_include_eos is not None:
            header["positions_include_eos"] = positions_include_eos
        fh.write(json.dumps(header) + "\n")
        for r in records:
            rec: dict = {
                "id": r.sample_id,
                "p_gold": [float(x) for x in r.p_gold],
                "entropy_norm": [float(x) for x in r.entropy_norm],
            }
            if has_full_dist:
                if r.dist is None:
                    raise ValueError(f"sample {r.sample_id}: full_dist promised but missing")
                rec["dist"] = [[float(x) for x in row] for row in r.dist]
            fh.write(json.dumps(rec) + "\n")


def read_signals(path: str | Path) -> tuple[dict, list[SignalRecord]]:
    with open(path, "r", encoding="utf-8") as fh:
        header = json.loads(fh.readline())
        records = []
        for line in fh:
            line = line.strip()
            if not line:
                continue
            rec = json.loads(line)
            records.append(
                SignalRecord(
                    sample_id=rec["id"],
                    p_gold=np.asarray(rec["p_gold"], dtype=np.float64),
                    entropy_norm=np.asarray(rec["entropy_norm"], dtype=np.float64),
                    dist=np.asarray(rec["dist"], dtype=np.float64) if "dist" in rec else None,
                )
            )
    return header, records
