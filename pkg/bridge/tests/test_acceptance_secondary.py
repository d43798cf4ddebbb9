"""Secondary acceptance: bridge parity with the toolkit's native signals."""

import numpy as np
from conftest import run_geckit

from gecbridge.checkpoint import load_toolkit_tagger
from gecbridge.formats import (
    load_encoded_corpus,
    load_tag_vocab,
    load_token_vocab,
    read_signals,
    write_signals,
)
from gecbridge.seq2edit import export_seq2edit_signals


def test_criterion_9_bridge_parity(toy_pipeline, tmp_path):
    token_vocab = load_token_vocab(toy_pipeline["tokens"])
    tag_vocab = load_tag_vocab(toy_pipeline["vocab"])
    corpus = load_encoded_corpus(toy_pipeline["train_enc"])
    tagger = load_toolkit_tagger(toy_pipeline["teacher"], token_vocab, tag_vocab)

    records, report, _ = export_seq2edit_signals(tagger, corpus, tag_vocab)
    _, native = read_signals(toy_pipeline["native_signals"])
    worst = 0.0
    for mine, ref in zip(records, native):
        assert mine.sample_id == ref.sample_id
        worst = max(worst, float(np.max(np.abs(mine.p_gold - ref.p_gold))))
        worst = max(worst, float(np.max(np.abs(mine.entropy_norm - ref.entropy_norm))))

    out = tmp_path / "bridge.jsonl"
    write_signals(out, "seq2edit", len(tag_vocab.tags), tag_vocab.hash, records, False)
    proc = run_geckit(
        "compute-weights", "--signals", str(out), "--corpus", toy_pipeline["train_enc"],
        "--out", str(tmp_path / "weights.jsonl"),
    )

    ok = worst <= 1e-6 and proc.returncode == 0
    print(
        f"[criterion 9] {'PASS' if ok else 'FAIL'}: bridge vs native max |diff| {worst:.2e} "
        f"(<= 1e-6); primary validator exit code {proc.returncode}"
    )
    assert ok, (worst, proc.stderr)
