"""Edit-level scoring: precision, recall, F-beta against gold span edits.

Hypothesis edits are extracted with the same Levenshtein backtrace used for
tag alignment, merging adjacent non-match operations into span edits, then
matched against each annotator's gold edits by exact (start, end,
replacement) equality. Per sentence the annotator with the highest local
F-beta is selected (ties to the lower annotator id); corpus scores come
from the summed counts.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .align import _DEL, _MATCH, _SUB, _levenshtein_ops
from .corpus import GoldEdit, GoldEditSet


@dataclass
class ScoreReport:
    tp: int
    fp: int
    fn: int
    beta: float = 0.5

    @property
    def precision(self) -> float:
        return self.tp / (self.tp + self.fp) if self.tp + self.fp else 1.0

    @property
    def recall(self) -> float:
        return self.tp / (self.tp + self.fn) if self.tp + self.fn else 1.0

    @property
    def f_beta(self) -> float:
        return _f_beta(self.precision, self.recall, self.beta)

    def to_text(self) -> str:
        return (
            f"TP {self.tp}  FP {self.fp}  FN {self.fn}\n"
            f"Precision {self.precision:.4f}\n"
            f"Recall    {self.recall:.4f}\n"
            f"F{self.beta:g}      {self.f_beta:.4f}\n"
        )

    def to_tsv(self) -> str:
        return (
            "tp\tfp\tfn\tprecision\trecall\tf_beta\tbeta\n"
            f"{self.tp}\t{self.fp}\t{self.fn}\t{self.precision:.6f}\t{self.recall:.6f}\t"
            f"{self.f_beta:.6f}\t{self.beta:g}\n"
        )


def _f_beta(p: float, r: float, beta: float) -> float:
    num = (1.0 + beta * beta) * p * r
    den = beta * beta * p + r
    return num / den if den else 0.0


def extract_edits(source: Sequence[str], hypothesis: Sequence[str]) -> list[GoldEdit]:
    """Span edits turning source into hypothesis; sorted and non-overlapping."""
    ops = _levenshtein_ops(tuple(source), tuple(hypothesis))
    edits: list[GoldEdit] = []
    src = 0
    run_start = -1
    run_repl: list[str] = []

    def flush(end: int) -> None:
        nonlocal run_start
        if run_start >= 0:
            edits.append(GoldEdit(run_start, end, tuple(run_repl)))
            run_start = -1
            run_repl.clear()

    for op, tj in ops:
        if op == _MATCH:
            flush(src)
            src += 1
        elif op == _SUB:
            if run_start < 0:
                run_start = src
            run_repl.append(hypothesis[tj])
            src += 1
        elif op == _DEL:
            if run_start < 0:
                run_start = src
            src += 1
        else:  # insertion before the next source token
            if run_start < 0:
                run_start = src
            run_repl.append(hypothesis[tj])
    flush(src)
    return edits


def apply_edits(source: Sequence[str], edits: Sequence[GoldEdit]) -> tuple[str, ...]:
    """Apply sorted non-overlapping span edits to source tokens."""
    out: list[str] = []
    pos = 0
    for e in edits:
        out.extend(source[pos : e.start])
        out.extend(e.replacement)
        pos = e.end
    out.extend(source[pos:])
    return tuple(out)


def _sentence_counts(hyp_edits: list[GoldEdit], gold_edits: Sequence[GoldEdit]) -> tuple[int, int, int]:
    gold_set = set(gold_edits)
    tp = sum(1 for e in hyp_edits if e in gold_set)
    return tp, len(hyp_edits) - tp, len(gold_edits) - tp


def score(
    sources: Sequence[Sequence[str]],
    hypotheses: Sequence[Sequence[str]],
    gold: Sequence[GoldEditSet],
    beta: float = 0.5,
) -> ScoreReport:
    """Corpus-level edit scores; per sentence the best-matching annotator counts."""
    if not (len(sources) == len(hypotheses) == len(gold)) or not sources:
        raise ValueError(
            f"need equal, non-zero sentence counts; got {len(sources)}/{len(hypotheses)}/{len(gold)}"
        )
    tp = fp = fn = 0
    for src, hyp, g in zip(sources, hypotheses, gold):
        hyp_edits = extract_edits(src, hyp)
        best = None
        for annotator in g.annotators():
            counts = _sentence_counts(hyp_edits, g.edits[annotator])
            s_tp, s_fp, s_fn = counts
            p = s_tp / (s_tp + s_fp) if s_tp + s_fp else 1.0
            r = s_tp / (s_tp + s_fn) if s_tp + s_fn else 1.0
            f = _f_beta(p, r, beta)
            if best is None or f > best[0]:
                best = (f, counts)
        assert best is not None, "GoldEditSet always has at least one annotator"
        tp += best[1][0]
        fp += best[1][1]
        fn += best[1][2]
    return ScoreReport(tp=tp, fp=fp, fn=fn, beta=beta)
