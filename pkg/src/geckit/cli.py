"""Command-line pipeline: vocab building, tag conversion, training, scoring.

Every subcommand validates vocab hashes before doing work, writes
deterministic outputs for a fixed seed, and drops a JSON manifest
(resolved configuration plus input file hashes) next to its primary output.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import __version__
from .align import (
    DEFAULT_A_MAX,
    DROP_SAMPLE,
    MAP_KEEP,
    TagVocab,
    align_to_tags,
    apply_tags,
    build_vocab,
    encode_corpus,
    load_encoded,
    save_encoded,
)
from .corpus import Corpus, GoldEditSet, load_m2, load_parallel
from .model import Tagger, TokenVocab
from .scoring import extract_edits, score
from .signals import generate_signals, load_signals, save_signals, validate_signals
from .trainer import MODES, TrainConfig, run_ablation, train
from .util import hash_file, write_jsonl
from .weights import WeightConfig, WeightsFile, compute_weights, load_weights, save_weights


def _write_manifest(out_path: str | Path, subcommand: str, args: argparse.Namespace, inputs: list[str]) -> None:
    manifest = {
        "subcommand": subcommand,
        "toolkit_version": __version__,
        "config": {k: v for k, v in sorted(vars(args).items()) if k != "func"},
        "input_hashes": {str(p): hash_file(p) for p in inputs},
        "seed": getattr(args, "seed", None),
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
    }
    path = Path(str(out_path) + ".manifest.json")
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2)
        fh.write("\n")


def _load_lines(path: str) -> list[tuple[str, ...]]:
    out = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            out.append(tuple(line.split(" ")) if line else ())
    return out


def cmd_build_vocab(args: argparse.Namespace) -> int:
    corpus = load_parallel(args.train)
    vocab = build_vocab(corpus, cap=args.cap, a_max=args.a_max)
    vocab.save(args.out)
    _write_manifest(args.out, "build-vocab", args, [args.train])
    print(f"wrote {args.out}: {len(vocab)} tags (cap {args.cap}), hash {vocab.content_hash()}")
    return 0


def _align_chunk(payload: tuple[list[tuple[int, tuple[str, ...], tuple[str, ...]]], int]):
    chunk, a_max = payload
    from .corpus import ParallelSample

    return {
        sid: align_to_tags(ParallelSample(id=0, source=src, target=tgt), a_max=a_max).tags
        for sid, src, tgt in chunk
    }


def cmd_tag_convert(args: argparse.Namespace) -> int:
    corpus = load_parallel(args.input)
    vocab = TagVocab.load(args.vocab)
    policy = DROP_SAMPLE if args.oov == "drop" else MAP_KEEP
    precomputed = None
    if args.workers > 1:
        # Alignment is a pure function; chunked workers, results keyed by id.
        items = [(s.id, s.source, s.target) for s in corpus]
        chunks = [items[i :: args.workers] for i in range(args.workers)]
        precomputed = {}
        with ProcessPoolExecutor(max_workers=args.workers) as pool:
            for part in pool.map(_align_chunk, [(c, args.a_max) for c in chunks]):
                precomputed.update(part)
    encoded, report = encode_corpus(corpus, vocab, oov_policy=policy, a_max=args.a_max, precomputed=precomputed)
    save_encoded(encoded, args.out)
    _write_manifest(args.out, "tag-convert", args, [args.input, args.vocab])
    print(
        f"wrote {args.out}: {report.kept}/{report.total} samples kept, "
        f"{report.dropped} dropped, {report.tags_mapped_to_keep} tags mapped to KEEP"
    )
    return 0


def _train_common(args: argparse.Namespace, mode: str) -> int:
    train_corpus = load_encoded(args.train)
    dev_corpus = load_encoded(args.dev) if args.dev else None
    tag_vocab = TagVocab.load(args.vocab)
    if tag_vocab.content_hash() != train_corpus.vocab_hash:
        print(f"error: vocab {args.vocab} does not match corpus {args.train}", file=sys.stderr)
        return 1
    token_vocab = TokenVocab.build([s.source for s in train_corpus])
    model = Tagger.create(
        token_vocab,
        tag_vocab,
        embed_dim=args.embed_dim,
        window=args.window,
        hidden_dim=args.hidden_dim,
        seed=args.seed,
    )
    cfg = TrainConfig(
        epochs=args.epochs,
        batch_size=args.batch,
        lr=args.lr,
        shuffle_seed=args.seed,
        mode=mode,
        kd_alpha=getattr(args, "kd_alpha", 0.5),
    )
    weights_by_id = None
    signals = None
    inputs = [args.train, args.vocab]
    if args.dev:
        inputs.append(args.dev)
    if mode in ("token", "sent", "mixed"):
        wf = load_weights(args.weights)
        if (wf.use_token, wf.use_sent) != (mode in ("token", "mixed"), mode in ("sent", "mixed")):
            print(
                f"error: weights file {args.weights} was computed with use_token={wf.use_token} "
                f"use_sent={wf.use_sent}, which does not match --weighting {mode}",
                file=sys.stderr,
            )
            return 1
        weights_by_id = wf.by_id()
        inputs.append(args.weights)
    elif mode == "kd":
        signals = load_signals(args.signals)
        inputs.append(args.signals)
    result = train(model, train_corpus, cfg, weights_by_id=weights_by_id, signals=signals, dev_corpus=dev_corpus)
    model.save(args.out)
    token_vocab.save(_tokens_path(args.out))
    write_jsonl(str(args.out) + ".log.jsonl", result.log)
    _write_manifest(args.out, args.cmd, args, inputs)
    print(
        f"wrote {args.out}: mode={mode} best epoch {result.best_epoch} "
        f"dev loss {result.best_dev_loss:.6f}"
    )
    return 0


def _tokens_path(ckpt: str) -> str:
    return str(ckpt) + ".tokens.json"


def cmd_train_teacher(args: argparse.Namespace) -> int:
    return _train_common(args, "none")


def cmd_train(args: argparse.Namespace) -> int:
    if args.weighting in ("token", "sent", "mixed") and not args.weights:
        print("error: --weights required for weighted modes", file=sys.stderr)
        return 1
    if args.weighting == "kd" and not args.signals:
        print("error: --signals required for kd mode", file=sys.stderr)
        return 1
    return _train_common(args, args.weighting)


def cmd_gen_signals(args: argparse.Namespace) -> int:
    corpus = load_encoded(args.corpus)
    tag_vocab = TagVocab.load(args.vocab)
    token_vocab = TokenVocab.load(args.tokens or _tokens_path(args.model))
    model = Tagger.load(args.model, token_vocab, tag_vocab)
    signals = generate_signals(model, corpus, want_full_dist=args.full_dist)
    save_signals(signals, args.out)
    _write_manifest(args.out, "gen-signals", args, [args.model, args.corpus, args.vocab])
    print(f"wrote {args.out}: {len(signals)} samples, full_dist={args.full_dist}")
    return 0


def cmd_compute_weights(args: argparse.Namespace) -> int:
    signals = load_signals(args.signals)
    inputs = [args.signals]
    corpus = None
    if args.corpus:
        corpus = load_encoded(args.corpus)
        inputs.append(args.corpus)
    elif args.parallel:
        corpus = load_parallel(args.parallel)
        inputs.append(args.parallel)
    if corpus is not None:
        report = validate_signals(signals, corpus)
        if not report.ok:
            print("error: signal validation failed:", file=sys.stderr)
            for v in report.violations[:20]:
                print("  " + v, file=sys.stderr)
            return 1
    cfg = WeightConfig(epsilon=args.epsilon, use_token=not args.no_token, use_sent=not args.no_sent)
    weights = compute_weights(signals, cfg)
    wf = WeightsFile(
        epsilon=cfg.epsilon,
        use_token=cfg.use_token,
        use_sent=cfg.use_sent,
        signal_file_hash=hash_file(args.signals),
        weights=weights,
    )
    save_weights(wf, args.out)
    _write_manifest(args.out, "compute-weights", args, inputs)
    print(f"wrote {args.out}: {len(weights)} samples (token={cfg.use_token}, sent={cfg.use_sent})")
    return 0


def cmd_predict(args: argparse.Namespace) -> int:
    tag_vocab = TagVocab.load(args.vocab)
    token_vocab = TokenVocab.load(args.tokens or _tokens_path(args.model))
    model = Tagger.load(args.model, token_vocab, tag_vocab)
    if args.format == "tsv":
        sources = [s.source for s in load_parallel(args.input)]
    else:
        sources = _load_lines(args.input)
    with open(args.out, "w", encoding="utf-8") as fh:
        for i, src in enumerate(sources):
            hyp = apply_tags(src, model.predict_tags(src, sample_id=i))
            fh.write(" ".join(hyp) + "\n")
    _write_manifest(args.out, "predict", args, [args.model, args.input, args.vocab])
    print(f"wrote {args.out}: {len(sources)} corrections")
    return 0


def _gold_from_parallel(corpus: Corpus) -> list[GoldEditSet]:
    return [
        GoldEditSet(source=s.source, edits={0: tuple(extract_edits(s.source, s.target))}) for s in corpus
    ]


def cmd_score(args: argparse.Namespace) -> int:
    hyps = _load_lines(args.hypotheses)
    inputs = [args.hypotheses]
    if args.gold_parallel:
        corpus = load_parallel(args.gold_parallel)
        sources = [s.source for s in corpus]
        gold = _gold_from_parallel(corpus)
        inputs.append(args.gold_parallel)
    else:
        gold = load_m2(args.gold)
        sources = [g.source for g in gold]
        inputs.append(args.gold)
    report = score(sources, hyps, gold, beta=args.beta)
    out = Path(args.out)
    out.write_text(report.to_tsv(), encoding="utf-8")
    Path(str(out) + ".txt").write_text(report.to_text(), encoding="utf-8")
    _write_manifest(args.out, "score", args, inputs)
    print(report.to_text(), end="")
    return 0


def cmd_ablate(args: argparse.Namespace) -> int:
    train_corpus = load_encoded(args.train)
    dev_corpus = load_encoded(args.dev)
    dev_parallel = load_parallel(args.dev_parallel)
    tag_vocab = TagVocab.load(args.vocab)
    signals = load_signals(args.signals)
    if tag_vocab.content_hash() != train_corpus.vocab_hash:
        print("error: vocab does not match training corpus", file=sys.stderr)
        return 1
    seeds = [int(s) for s in args.seeds.split(",") if s]
    if not seeds:
        print("error: need at least one seed", file=sys.stderr)
        return 1
    token_vocab = TokenVocab.build([s.source for s in train_corpus])
    base = TrainConfig(epochs=args.epochs, batch_size=args.batch, lr=args.lr, kd_alpha=args.kd_alpha)
    modes = [m for m in args.modes.split(",") if m]
    for m in modes:
        if m not in MODES:
            print(f"error: unknown mode {m!r}", file=sys.stderr)
            return 1
    report = run_ablation(
        train_corpus,
        signals,
        dev_corpus,
        dev_parallel,
        token_vocab,
        tag_vocab,
        base,
        seeds,
        epsilon=args.epsilon,
        modes=modes,
        model_opts={"embed_dim": args.embed_dim, "window": args.window, "hidden_dim": args.hidden_dim},
    )
    Path(args.out).write_text(report.to_tsv(), encoding="utf-8")
    Path(str(args.out) + ".runs.tsv").write_text(report.runs_tsv(), encoding="utf-8")
    Path(str(args.out) + ".txt").write_text(report.to_text(), encoding="utf-8")
    _write_manifest(args.out, "ablate", args, [args.train, args.dev, args.dev_parallel, args.signals, args.vocab])
    print(report.to_text(), end="")
    return 0


def cmd_inspect(args: argparse.Namespace) -> int:
    corpus = load_encoded(args.corpus)
    vocab = TagVocab.load(args.vocab)
    if vocab.content_hash() != corpus.vocab_hash:
        print(f"error: vocab {args.vocab} does not match corpus {args.corpus}", file=sys.stderr)
        return 1
    wf = load_weights(args.weights)
    sample = next((s for s in corpus if s.sample_id == args.sample), None)
    w = wf.by_id().get(args.sample)
    if sample is None or w is None:
        print(f"error: sample {args.sample} not found in corpus or weights", file=sys.stderr)
        return 1
    print(f"sample {args.sample}  w_sent = {w.w_sent:.6f}")
    print(f"{'token':<16}{'tag':<24}{'w_token':>10}")
    tokens = ["(start)"] + list(sample.source)
    for tok, tag_id, wt in zip(tokens, sample.tag_ids, w.w_token):
        print(f"{tok:<16}{vocab.tags[tag_id].render():<24}{wt:>10.6f}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="geckit", description=__doc__)
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="cmd", required=True)

    def add_model_flags(sp: argparse.ArgumentParser) -> None:
        sp.add_argument("--embed-dim", type=int, default=32)
        sp.add_argument("--window", type=int, default=2)
        sp.add_argument("--hidden-dim", type=int, default=64)

    def add_train_flags(sp: argparse.ArgumentParser) -> None:
        sp.add_argument("--epochs", type=int, default=20)
        sp.add_argument("--lr", type=float, default=5e-3)
        sp.add_argument("--batch", type=int, default=32)
        sp.add_argument("--seed", type=int, default=0)
        add_model_flags(sp)

    sp = sub.add_parser("build-vocab", help="build the capped tag vocabulary from a parallel TSV")
    sp.add_argument("--train", required=True)
    sp.add_argument("--cap", type=int, default=500)
    sp.add_argument("--a-max", type=int, default=DEFAULT_A_MAX)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_build_vocab)

    sp = sub.add_parser("tag-convert", help="encode a parallel TSV into tag-index sequences")
    sp.add_argument("--input", required=True)
    sp.add_argument("--vocab", required=True)
    sp.add_argument("--oov", choices=["drop", "keep"], default="drop")
    sp.add_argument("--a-max", type=int, default=DEFAULT_A_MAX)
    sp.add_argument("--workers", type=int, default=1)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_tag_convert)

    sp = sub.add_parser("train-teacher", help="vanilla-train a tagger to serve as the teacher")
    sp.add_argument("--train", required=True)
    sp.add_argument("--dev")
    sp.add_argument("--vocab", required=True)
    sp.add_argument("--out", required=True)
    add_train_flags(sp)
    sp.set_defaults(func=cmd_train_teacher)

    sp = sub.add_parser("gen-signals", help="export teacher statistics from a trained tagger")
    sp.add_argument("--model", required=True)
    sp.add_argument("--tokens", help="token vocab JSON (default: <model>.tokens.json)")
    sp.add_argument("--vocab", required=True)
    sp.add_argument("--corpus", required=True)
    sp.add_argument("--full-dist", action="store_true")
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_gen_signals)

    sp = sub.add_parser("compute-weights", help="turn teacher signals into training weights")
    sp.add_argument("--signals", required=True)
    sp.add_argument("--corpus", help="encoded corpus for validating seq2edit signals (recommended)")
    sp.add_argument("--parallel", help="parallel TSV for validating seq2seq signals")
    sp.add_argument("--epsilon", type=float, default=WeightConfig().epsilon)
    sp.add_argument("--no-token", action="store_true")
    sp.add_argument("--no-sent", action="store_true")
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_compute_weights)

    sp = sub.add_parser("train", help="train a tagger under a weighting mode")
    sp.add_argument("--train", required=True)
    sp.add_argument("--dev")
    sp.add_argument("--vocab", required=True)
    sp.add_argument("--weighting", choices=list(MODES), default="mixed")
    sp.add_argument("--weights")
    sp.add_argument("--signals")
    sp.add_argument("--kd-alpha", type=float, default=0.5)
    sp.add_argument("--out", required=True)
    add_train_flags(sp)
    sp.set_defaults(func=cmd_train)

    sp = sub.add_parser("predict", help="correct sentences with a trained tagger")
    sp.add_argument("--model", required=True)
    sp.add_argument("--tokens")
    sp.add_argument("--vocab", required=True)
    sp.add_argument("--input", required=True)
    sp.add_argument("--format", choices=["tsv", "lines"], default="tsv")
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_predict)

    sp = sub.add_parser("score", help="edit-level P/R/F against gold edits")
    sp.add_argument("--hypotheses", required=True)
    sp.add_argument("--gold", help="gold edits in M2 layout")
    sp.add_argument("--gold-parallel", help="derive gold edits from a parallel TSV")
    sp.add_argument("--beta", type=float, default=0.5)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_score)

    sp = sub.add_parser("ablate", help="train and score every weighting mode over seeds")
    sp.add_argument("--train", required=True)
    sp.add_argument("--dev", required=True, help="encoded dev corpus (for dev loss)")
    sp.add_argument("--dev-parallel", required=True, help="parallel dev TSV (for scoring)")
    sp.add_argument("--vocab", required=True)
    sp.add_argument("--signals", required=True)
    sp.add_argument("--seeds", default="1,2,3,4,5")
    sp.add_argument("--modes", default=",".join(MODES))
    sp.add_argument("--epsilon", type=float, default=WeightConfig().epsilon)
    sp.add_argument("--kd-alpha", type=float, default=0.5)
    sp.add_argument("--epochs", type=int, default=8)
    sp.add_argument("--lr", type=float, default=5e-3)
    sp.add_argument("--batch", type=int, default=32)
    sp.add_argument("--out", required=True)
    add_model_flags(sp)
    sp.set_defaults(func=cmd_ablate)

    sp = sub.add_parser("inspect", help="show one sample's tags and weights")
    sp.add_argument("--corpus", required=True)
    sp.add_argument("--vocab", required=True)
    sp.add_argument("--weights", required=True)
    sp.add_argument("--sample", type=int, required=True)
    sp.set_defaults(func=cmd_inspect)

    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.cmd == "score" and not (args.gold or args.gold_parallel):
        parser.error("score needs --gold or --gold-parallel")
    try:
        return args.func(args)
    except (ValueError, OSError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
