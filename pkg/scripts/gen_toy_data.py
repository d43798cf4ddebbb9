#!/usr/bin/env python3
"""Regenerate the bundled toy corpus under data/ (committed for reproducibility)."""

from pathlib import Path

from geckit.corpus import GoldEditSet, save_m2, save_parallel
from geckit.scoring import extract_edits
from geckit.synth import SynthConfig, generate

ROOT = Path(__file__).resolve().parent.parent / "data"


def main() -> None:
    ROOT.mkdir(exist_ok=True)
    world = generate(SynthConfig(n_train=120, n_dev=40, seed=7, corruption_rate=0.15))
    save_parallel(world.train, ROOT / "toy.train.tsv")
    save_parallel(world.dev, ROOT / "toy.dev.tsv")
    gold = [
        GoldEditSet(source=s.source, edits={0: tuple(extract_edits(s.source, s.target))})
        for s in world.dev
    ]
    save_m2(gold, ROOT / "toy.dev.m2")
    print(f"wrote {ROOT}/toy.train.tsv ({len(world.train)}), toy.dev.tsv ({len(world.dev)}), toy.dev.m2")


if __name__ == "__main__":
    main()
