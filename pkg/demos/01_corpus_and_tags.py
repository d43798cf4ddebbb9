#!/usr/bin/env python3
"""Corpus loading and edit-tag alignment.

Walks through the Seq2Edit data model: a parallel corpus is converted into
per-slot edit tags by a Levenshtein alignment, tags apply back to sources
losslessly, and a capped tag vocabulary is built from edit frequencies.
"""

from pathlib import Path

from geckit.align import align_to_tags, apply_tags, build_vocab, encode_corpus
from geckit.corpus import load_parallel

DATA = Path(__file__).resolve().parent.parent / "data"

corpus = load_parallel(DATA / "toy.train.tsv")
print(f"loaded {len(corpus)} sentence pairs from toy.train.tsv\n")

print("A few alignments (slot 0 is the virtual start slot):")
for sample in corpus.samples[:6]:
    tags = align_to_tags(sample)
    print(f"  source: {' '.join(sample.source)}")
    print(f"  target: {' '.join(sample.target)}")
    print(f"  tags:   {' '.join(t.render() for t in tags.tags)}")
    restored = apply_tags(sample.source, tags)
    assert restored == sample.target, "alignment must round-trip"
    print()

vocab = build_vocab(corpus, cap=50)
print(f"tag vocabulary (cap 50): {len(vocab)} tags, hash {vocab.content_hash()}")
most_common = sorted(
    ((vocab.counts[t], t.render()) for t in vocab.tags),
    reverse=True,
)[:10]
for count, render in most_common:
    print(f"  {count:6d}  {render}")

encoded, report = encode_corpus(corpus, vocab)
print(f"\nencoded: {report.kept}/{report.total} kept, {report.dropped} dropped (oov policy drop_sample)")

small = build_vocab(corpus, cap=5)
_, rep_small = encode_corpus(corpus, small)
print(f"with cap 5: {rep_small.kept} kept, {rep_small.dropped} dropped — the cap trades coverage for model size")
