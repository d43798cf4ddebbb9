"""Small shared helpers: FNV hashing and JSON-lines I/O."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Iterable, Iterator

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_U64 = 0xFFFFFFFFFFFFFFFF


def fnv1a64(data: bytes) -> int:
    """64-bit FNV-1a hash of a byte string."""
    h = _FNV_OFFSET
    for b in data:
        h = ((h ^ b) * _FNV_PRIME) & _U64
    return h


def fnv1a64_hex(data: bytes) -> str:
    return f"{fnv1a64(data):016x}"


def hash_lines(lines: Iterable[str]) -> str:
    """Content hash of an ordered list of strings, joined by newlines."""
    return fnv1a64_hex("\n".join(lines).encode("utf-8"))


def hash_file(path: str | Path) -> str:
    return fnv1a64_hex(Path(path).read_bytes())


def write_jsonl(path: str | Path, records: Iterable[dict[str, Any]]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec, ensure_ascii=False))
            fh.write("\n")


def read_jsonl(path: str | Path) -> Iterator[dict[str, Any]]:
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                yield json.loads(line)
