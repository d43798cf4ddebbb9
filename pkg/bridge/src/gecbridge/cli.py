"""Bridge CLI: export teacher-signal files consumable by the toolkit.

export-seq2edit adapts a toolkit checkpoint (or, programmatically, any
EditTagger) onto an encoded corpus; export-seq2seq runs a teacher-forced
pass of a Seq2Seq teacher over a parallel corpus. The built-in seq2seq
teachers are stubs (uniform, echo); real models plug in via the
Seq2SeqTeacher protocol.
"""

from __future__ import annotations

import argparse
import sys

from .checkpoint import load_toolkit_tagger
from .config import SEQ2EDIT, SEQ2SEQ, BridgeConfig, check_manner
from .formats import (
    load_encoded_corpus,
    load_parallel,
    load_tag_vocab,
    load_token_vocab,
    write_signals,
)
from .seq2edit import export_seq2edit_signals
from .seq2seq import (
    EchoSeq2SeqTeacher,
    UniformSeq2SeqTeacher,
    export_seq2seq_signals,
    teacher_vocab_hash,
)


def cmd_export_seq2edit(args: argparse.Namespace) -> int:
    config = BridgeConfig(
        model=args.checkpoint,
        manner=SEQ2EDIT,
        output=args.out,
        batch_size=args.batch,
        emit_full_dist=args.full_dist,
    )
    check_manner(config, SEQ2EDIT)  # toolkit checkpoints are always edit taggers
    token_vocab = load_token_vocab(args.tokens or args.checkpoint + ".tokens.json")
    tag_vocab = load_tag_vocab(args.vocab)
    corpus = load_encoded_corpus(args.corpus)
    tagger = load_toolkit_tagger(config.model, token_vocab, tag_vocab)
    records, report, emitted_dist = export_seq2edit_signals(
        tagger, corpus, tag_vocab, want_full_dist=config.emit_full_dist, batch_size=config.batch_size
    )
    write_signals(
        config.output,
        manner=SEQ2EDIT,
        vocab_size=len(tag_vocab.tags),
        vocab_hash=tag_vocab.hash,
        records=records,
        has_full_dist=emitted_dist,
    )
    print(
        f"wrote {args.out}: {len(records)} samples; mapping coverage "
        f"{report.mappable_gold_types}/{report.gold_types} gold tag types, "
        f"bijective={report.bijective}, full_dist={emitted_dist}"
    )
    return 0


def cmd_export_seq2seq(args: argparse.Namespace) -> int:
    config = BridgeConfig(
        model=args.teacher,
        manner=SEQ2SEQ,
        output=args.out,
        batch_size=args.batch,
        emit_full_dist=args.full_dist,
    )
    check_manner(config, SEQ2SEQ)
    pairs = load_parallel(args.parallel)
    seen: list[str] = []
    for src, tgt in pairs:
        for tok in (*src, *tgt):
            if tok not in seen:
                seen.append(tok)
    if config.model == "uniform":
        teacher = UniformSeq2SeqTeacher(tokens=seen)
    else:
        teacher = EchoSeq2SeqTeacher(tokens=seen)
    records, report = export_seq2seq_signals(
        teacher, pairs, want_full_dist=config.emit_full_dist, batch_size=config.batch_size
    )
    write_signals(
        config.output,
        manner=SEQ2SEQ,
        vocab_size=len(teacher.vocab()),
        vocab_hash=teacher_vocab_hash(teacher),
        records=records,
        has_full_dist=config.emit_full_dist,
        positions_include_eos=True,
    )
    note = "" if report.clean else f"; {report.positions_zeroed} positions zeroed (tokens outside teacher vocab)"
    print(f"wrote {args.out}: {len(records)} samples over |V|={len(teacher.vocab())}{note}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="gecbridge", description=__doc__)
    sub = p.add_subparsers(dest="cmd", required=True)

    sp = sub.add_parser("export-seq2edit", help="signals from a toolkit tagger checkpoint")
    sp.add_argument("--checkpoint", required=True)
    sp.add_argument("--tokens", help="token vocab JSON (default: <checkpoint>.tokens.json)")
    sp.add_argument("--vocab", required=True, help="toolkit tag vocab JSON")
    sp.add_argument("--corpus", required=True, help="encoded corpus JSONL")
    sp.add_argument("--full-dist", action="store_true")
    sp.add_argument("--batch", type=int, default=64)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_export_seq2edit)

    sp = sub.add_parser("export-seq2seq", help="teacher-forced signals from a stub seq2seq teacher")
    sp.add_argument("--parallel", required=True, help="parallel TSV")
    sp.add_argument("--teacher", choices=["uniform", "echo"], default="echo")
    sp.add_argument("--full-dist", action="store_true")
    sp.add_argument("--batch", type=int, default=32)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_export_seq2seq)

    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
