"""Parallel corpora and gold-edit files.

A parallel corpus is a UTF-8 TSV file, one sentence pair per line:

    source tokens separated by single spaces <TAB> target tokens

Tokens are pre-tokenized; the toolkit never tokenizes. Gold edits use a
subset of the M2 layout: an ``S`` line with the source tokens followed by
``A`` lines, one edit each, blank-line separated records.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple


class CorpusFormatError(ValueError):
    """Malformed corpus or gold file; carries the offending line number."""

    def __init__(self, path: str | Path, lineno: int, message: str):
        super().__init__(f"{path}:{lineno}: {message}")
        self.path = str(path)
        self.lineno = lineno


def _check_tokens(tokens: tuple[str, ...], path: str | Path, lineno: int, side: str) -> None:
    for tok in tokens:
        if not tok:
            raise CorpusFormatError(path, lineno, f"empty token in {side} sentence")
        if any(ch.isspace() for ch in tok):
            raise CorpusFormatError(path, lineno, f"whitespace inside {side} token {tok!r}")


@dataclass(frozen=True)
class ParallelSample:
    """One (source, target) sentence pair; source has at least one token."""

    id: int
    source: tuple[str, ...]
    target: tuple[str, ...]

    def __post_init__(self) -> None:
        if len(self.source) < 1:
            raise ValueError(f"sample {self.id}: source must have at least one token")
        for side, toks in (("source", self.source), ("target", self.target)):
            for tok in toks:
                if not tok or any(ch.isspace() for ch in tok):
                    raise ValueError(f"sample {self.id}: bad {side} token {tok!r}")


@dataclass
class Corpus:
    name: str
    samples: list[ParallelSample] = field(default_factory=list)

    def __post_init__(self) -> None:
        for i, s in enumerate(self.samples):
            if s.id != i:
                raise ValueError(f"corpus {self.name}: sample at index {i} has id {s.id}")

    def __len__(self) -> int:
        return len(self.samples)

    def __iter__(self):
        return iter(self.samples)


def load_parallel(path: str | Path, name: str | None = None) -> Corpus:
    """Read a parallel TSV file into a Corpus, preserving line order."""
    path = Path(path)
    samples: list[ParallelSample] = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw[:-1] if raw.endswith("\n") else raw
            if line == "":
                raise CorpusFormatError(path, lineno, "blank line")
            parts = line.split("\t")
            if len(parts) != 2:
                raise CorpusFormatError(path, lineno, f"expected exactly one tab, found {len(parts) - 1}")
            src_part, tgt_part = parts
            if src_part == "":
                raise CorpusFormatError(path, lineno, "empty source sentence")
            source = tuple(src_part.split(" "))
            target = tuple(tgt_part.split(" ")) if tgt_part else ()
            _check_tokens(source, path, lineno, "source")
            _check_tokens(target, path, lineno, "target")
            samples.append(ParallelSample(id=len(samples), source=source, target=target))
    return Corpus(name=name or path.stem, samples=samples)


def save_parallel(corpus: Corpus, path: str | Path) -> None:
    """Write a corpus back to TSV; inverse of load_parallel for well-formed files."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        for s in corpus.samples:
            fh.write(" ".join(s.source))
            fh.write("\t")
            fh.write(" ".join(s.target))
            fh.write("\n")


class GoldEdit(NamedTuple):
    """Span edit on source tokens: replace tokens [start, end) with `replacement`."""

    start: int
    end: int
    replacement: tuple[str, ...]


@dataclass
class GoldEditSet:
    """Gold edits for one sentence, keyed by annotator id."""

    source: tuple[str, ...]
    edits: dict[int, tuple[GoldEdit, ...]]

    def annotators(self) -> list[int]:
        return sorted(self.edits)


def _validate_gold_edits(
    source: tuple[str, ...],
    edits: dict[int, list[GoldEdit]],
    path: str | Path,
    lineno: int,
) -> dict[int, tuple[GoldEdit, ...]]:
    m = len(source)
    out: dict[int, tuple[GoldEdit, ...]] = {}
    for annotator, lst in edits.items():
        prev_end = -1
        prev_span = None
        for e in lst:
            if not (0 <= e.start <= e.end <= m):
                raise CorpusFormatError(path, lineno, f"edit span ({e.start},{e.end}) outside [0,{m}]")
            if prev_span is not None and (e.start < prev_end or (e.start, e.end) == prev_span):
                raise CorpusFormatError(
                    path, lineno, f"annotator {annotator} edits overlap or are unsorted at ({e.start},{e.end})"
                )
            prev_end = e.end
            prev_span = (e.start, e.end)
        out[annotator] = tuple(lst)
    if not out:
        out[0] = ()
    return out


def load_m2(path: str | Path) -> list[GoldEditSet]:
    """Read gold edits in the M2 subset layout.

    Each record is an ``S`` header line followed by zero or more ``A`` edit
    lines. The edit type field is parsed but ignored; a ``noop`` edit records
    the annotator with an empty edit list.
    """
    path = Path(path)
    records: list[GoldEditSet] = []
    source: tuple[str, ...] | None = None
    edits: dict[int, list[GoldEdit]] = {}
    header_line = 0

    def flush(lineno: int) -> None:
        nonlocal source, edits
        if source is None:
            return
        records.append(GoldEditSet(source=source, edits=_validate_gold_edits(source, edits, path, lineno)))
        source, edits = None, {}

    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if line == "":
                flush(lineno)
                continue
            if line.startswith("S "):
                flush(lineno)
                toks = tuple(line[2:].split(" "))
                _check_tokens(toks, path, lineno, "source")
                source = toks
                header_line = lineno
            elif line.startswith("A "):
                if source is None:
                    raise CorpusFormatError(path, lineno, "edit line before any S line")
                fields = line[2:].split("|||")
                if len(fields) < 6:
                    raise CorpusFormatError(path, lineno, f"expected 6 |||-separated fields, found {len(fields)}")
                span = fields[0].split()
                if len(span) != 2:
                    raise CorpusFormatError(path, lineno, f"bad span field {fields[0]!r}")
                try:
                    start, end = int(span[0]), int(span[1])
                    annotator = int(fields[5])
                except ValueError as exc:
                    raise CorpusFormatError(path, lineno, f"non-integer span or annotator: {exc}") from None
                etype = fields[1]
                edits.setdefault(annotator, [])
                if etype == "noop":
                    continue
                repl_field = fields[2]
                replacement = () if repl_field in ("", "-NONE-") else tuple(repl_field.split(" "))
                edits[annotator].append(GoldEdit(start, end, replacement))
            else:
                raise CorpusFormatError(path, lineno, f"unrecognized line {line[:40]!r}")
        flush(header_line + 1)
    return records


def save_m2(records: list[GoldEditSet], path: str | Path) -> None:
    """Write gold edits in the M2 subset layout read by load_m2."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        for rec in records:
            fh.write("S " + " ".join(rec.source) + "\n")
            for annotator in rec.annotators():
                lst = rec.edits[annotator]
                if not lst:
                    fh.write(f"A -1 -1|||noop|||-NONE-|||REQUIRED|||-NONE-|||{annotator}\n")
                    continue
                for e in lst:
                    repl = " ".join(e.replacement) if e.replacement else "-NONE-"
                    fh.write(f"A {e.start} {e.end}|||UNK|||{repl}|||REQUIRED|||-NONE-|||{annotator}\n")
            fh.write("\n")
