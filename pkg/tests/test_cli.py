import json
import time
from pathlib import Path

import pytest

from geckit.cli import main
from geckit.util import read_jsonl

DATA = Path(__file__).resolve().parent.parent / "data"


@pytest.fixture(scope="module")
def pipeline(tmp_path_factory):
    """Run the full pipeline once on the bundled toy corpus."""
    work = tmp_path_factory.mktemp("pipeline")
    train_tsv = str(DATA / "toy.train.tsv")
    dev_tsv = str(DATA / "toy.dev.tsv")
    p = {
        "work": work,
        "train_tsv": train_tsv,
        "dev_tsv": dev_tsv,
        "vocab": str(work / "vocab.json"),
        "train_enc": str(work / "train.jsonl"),
        "dev_enc": str(work / "dev.jsonl"),
        "teacher": str(work / "teacher.ckpt"),
        "signals": str(work / "signals.jsonl"),
        "weights": str(work / "weights.jsonl"),
        "student": str(work / "student.ckpt"),
        "hyp": str(work / "hyp.txt"),
        "report": str(work / "score.tsv"),
    }
    assert main(["build-vocab", "--train", train_tsv, "--cap", "100", "--out", p["vocab"]]) == 0
    assert main(["tag-convert", "--input", train_tsv, "--vocab", p["vocab"], "--oov", "keep", "--out", p["train_enc"]]) == 0
    assert main(["tag-convert", "--input", dev_tsv, "--vocab", p["vocab"], "--oov", "keep", "--out", p["dev_enc"]]) == 0
    assert main([
        "train-teacher", "--train", p["train_enc"], "--dev", p["dev_enc"], "--vocab", p["vocab"],
        "--epochs", "30", "--lr", "0.01", "--batch", "16", "--seed", "1",
        "--embed-dim", "16", "--hidden-dim", "32", "--out", p["teacher"],
    ]) == 0
    assert main(["gen-signals", "--model", p["teacher"], "--vocab", p["vocab"], "--corpus", p["train_enc"], "--full-dist", "--out", p["signals"]]) == 0
    assert main(["compute-weights", "--signals", p["signals"], "--corpus", p["train_enc"], "--out", p["weights"]]) == 0
    assert main([
        "train", "--train", p["train_enc"], "--dev", p["dev_enc"], "--vocab", p["vocab"],
        "--weighting", "mixed", "--weights", p["weights"],
        "--epochs", "30", "--lr", "0.01", "--batch", "16", "--seed", "2",
        "--embed-dim", "16", "--hidden-dim", "32", "--out", p["student"],
    ]) == 0
    assert main(["predict", "--model", p["student"], "--vocab", p["vocab"], "--input", dev_tsv, "--out", p["hyp"]]) == 0
    return p


def test_pipeline_under_time_budget(pipeline):
    # the fixture runs the whole pipeline; this is the CI timing oracle
    start = time.monotonic()
    assert Path(pipeline["hyp"]).exists()
    assert time.monotonic() - start < 300


def test_vocab_and_encoded_outputs(pipeline):
    vocab = json.loads(Path(pipeline["vocab"]).read_text())
    assert vocab["tags"][0] == "$KEEP" and "$DELETE" in vocab["tags"]
    records = list(read_jsonl(pipeline["train_enc"]))
    header, samples = records[0], records[1:]
    assert header["vocab_hash"] == vocab["hash"]
    assert len(samples) == 120
    assert all(len(r["tags"]) == len(r["source"]) + 1 for r in samples)


def test_signal_file_shape(pipeline):
    records = list(read_jsonl(pipeline["signals"]))
    header = records[0]
    assert header["manner"] == "seq2edit" and header["has_full_dist"] is True
    assert all("p_gold" in r and "entropy_norm" in r and "dist" in r for r in records[1:])


def test_weights_file_and_inspect(pipeline, capsys):
    records = list(read_jsonl(pipeline["weights"]))
    header, rows = records[0], records[1:]
    assert header["use_token"] and header["use_sent"]
    assert len(rows) == 120
    assert all(0.0 <= r["w_sent"] <= 1.0 for r in rows)
    rc = main([
        "inspect", "--corpus", pipeline["train_enc"], "--vocab", pipeline["vocab"],
        "--weights", pipeline["weights"], "--sample", "3",
    ])
    assert rc == 0
    out = capsys.readouterr().out
    assert "w_sent" in out and "(start)" in out and "$" in out


def test_score_against_m2_and_parallel(pipeline, tmp_path):
    report = str(tmp_path / "rep.tsv")
    rc = main([
        "score", "--hypotheses", pipeline["hyp"], "--gold", str(DATA / "toy.dev.m2"),
        "--out", report,
    ])
    assert rc == 0
    text = Path(report).read_text()
    assert text.startswith("tp\tfp\tfn")
    rc = main([
        "score", "--hypotheses", pipeline["hyp"], "--gold-parallel", pipeline["dev_tsv"],
        "--out", str(tmp_path / "rep2.tsv"),
    ])
    assert rc == 0
    # both gold routes agree on this corpus
    assert Path(report).read_text() == (tmp_path / "rep2.tsv").read_text()


def test_trained_student_beats_do_nothing(pipeline):
    hyp_lines = Path(pipeline["hyp"]).read_text().strip().split("\n")
    src_lines = [l.split("\t")[0] for l in Path(pipeline["dev_tsv"]).read_text().strip().split("\n")]
    assert hyp_lines != src_lines  # the model actually edits something


def test_manifests_written(pipeline):
    for key in ("vocab", "train_enc", "teacher", "signals", "weights", "student"):
        m = Path(pipeline[key] + ".manifest.json")
        assert m.exists()
        manifest = json.loads(m.read_text())
        assert manifest["toolkit_version"]
        assert manifest["input_hashes"]
        assert manifest["subcommand"]


def test_ablation_em_toy(pipeline, tmp_path):
    out = str(tmp_path / "ablation.tsv")
    rc = main([
        "ablate", "--train", pipeline["train_enc"], "--dev", pipeline["dev_enc"],
        "--dev-parallel", pipeline["dev_tsv"], "--vocab", pipeline["vocab"],
        "--signals", pipeline["signals"], "--seeds", "1",
        "--epochs", "3", "--batch", "16", "--embed-dim", "16", "--hidden-dim", "24",
        "--out", out,
    ])
    assert rc == 0
    lines = Path(out).read_text().strip().split("\n")
    assert len(lines) == 6  # header + 5 modes
    assert Path(out + ".runs.tsv").exists()
    assert Path(out + ".txt").exists()


def test_no_token_no_sent_gives_unit_weights(pipeline, tmp_path):
    out = str(tmp_path / "unit.jsonl")
    rc = main([
        "compute-weights", "--signals", pipeline["signals"], "--no-token", "--no-sent",
        "--out", out,
    ])
    assert rc == 0
    rows = list(read_jsonl(out))[1:]
    assert all(r["w_sent"] == 1.0 and all(x == 1.0 for x in r["w_token"]) for r in rows)


def test_idempotent_outputs(pipeline, tmp_path):
    # identical inputs and seed -> byte-identical outputs (manifests aside)
    a, b = str(tmp_path / "a.jsonl"), str(tmp_path / "b.jsonl")
    for out in (a, b):
        assert main(["tag-convert", "--input", pipeline["train_tsv"], "--vocab", pipeline["vocab"], "--out", out]) == 0
    assert Path(a).read_bytes() == Path(b).read_bytes()


def test_error_paths(pipeline, tmp_path, capsys):
    # missing file
    assert main(["build-vocab", "--train", "nope.tsv", "--out", str(tmp_path / "v.json")]) == 1
    assert "error" in capsys.readouterr().err
    # vocab/corpus mismatch
    other_vocab = str(tmp_path / "other_vocab.json")
    assert main(["build-vocab", "--train", pipeline["dev_tsv"], "--cap", "2", "--out", other_vocab]) == 0
    rc = main([
        "train-teacher", "--train", pipeline["train_enc"], "--vocab", other_vocab,
        "--epochs", "1", "--out", str(tmp_path / "t.ckpt"),
    ])
    assert rc == 1
    assert "does not match" in capsys.readouterr().err
    # weighted training without weights
    rc = main([
        "train", "--train", pipeline["train_enc"], "--vocab", pipeline["vocab"],
        "--weighting", "mixed", "--epochs", "1", "--out", str(tmp_path / "s.ckpt"),
    ])
    assert rc == 1
    # unknown flag exits with argparse error (SystemExit 2)
    with pytest.raises(SystemExit) as exc:
        main(["build-vocab", "--nonsense"])
    assert exc.value.code == 2


def test_weights_mode_consistency_checked(pipeline, tmp_path, capsys):
    # weights computed with both granularities cannot feed --weighting token
    rc = main([
        "train", "--train", pipeline["train_enc"], "--dev", pipeline["dev_enc"],
        "--vocab", pipeline["vocab"], "--weighting", "token", "--weights", pipeline["weights"],
        "--epochs", "1", "--out", str(tmp_path / "s.ckpt"),
    ])
    assert rc == 1
    assert "use_token" in capsys.readouterr().err


def test_workers_flag_matches_serial(pipeline, tmp_path):
    a, b = str(tmp_path / "w1.jsonl"), str(tmp_path / "w2.jsonl")
    assert main(["tag-convert", "--input", pipeline["train_tsv"], "--vocab", pipeline["vocab"], "--out", a]) == 0
    assert main(["tag-convert", "--input", pipeline["train_tsv"], "--vocab", pipeline["vocab"], "--workers", "3", "--out", b]) == 0
    assert Path(a).read_bytes() == Path(b).read_bytes()
