import subprocess
import sys
from pathlib import Path

import pytest

DATA = Path(__file__).resolve().parent.parent.parent / "data"


def run_geckit(*args: str) -> subprocess.CompletedProcess:
    """Invoke the toolkit through its installed CLI (the external interface)."""
    return subprocess.run(
        [sys.executable, "-m", "geckit.cli", *args], capture_output=True, text=True
    )


@pytest.fixture(scope="session")
def toy_pipeline(tmp_path_factory):
    """Toolkit artifacts produced through the geckit CLI on the toy corpus."""
    work = tmp_path_factory.mktemp("toolkit")
    f = {
        "train_tsv": str(DATA / "toy.train.tsv"),
        "dev_tsv": str(DATA / "toy.dev.tsv"),
        "vocab": str(work / "vocab.json"),
        "train_enc": str(work / "train.jsonl"),
        "teacher": str(work / "teacher.ckpt"),
        "tokens": str(work / "teacher.ckpt.tokens.json"),
        "native_signals": str(work / "native.jsonl"),
        "native_signals_dist": str(work / "native_dist.jsonl"),
    }
    steps = [
        ("build-vocab", "--train", f["train_tsv"], "--cap", "100", "--out", f["vocab"]),
        ("tag-convert", "--input", f["train_tsv"], "--vocab", f["vocab"], "--oov", "keep", "--out", f["train_enc"]),
        (
            "train-teacher", "--train", f["train_enc"], "--vocab", f["vocab"],
            "--epochs", "12", "--lr", "0.01", "--batch", "16", "--seed", "5",
            "--embed-dim", "16", "--hidden-dim", "24", "--out", f["teacher"],
        ),
        ("gen-signals", "--model", f["teacher"], "--vocab", f["vocab"], "--corpus", f["train_enc"], "--out", f["native_signals"]),
        (
            "gen-signals", "--model", f["teacher"], "--vocab", f["vocab"], "--corpus", f["train_enc"],
            "--full-dist", "--out", f["native_signals_dist"],
        ),
    ]
    for step in steps:
        proc = run_geckit(*step)
        assert proc.returncode == 0, f"{step[0]} failed: {proc.stderr}"
    return f
