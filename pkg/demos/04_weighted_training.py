#!/usr/bin/env python3
"""Mixed-grained weighted training versus vanilla training under label noise.

Generates a synthetic corpus with 20% corrupted annotations, trains a
teacher on the noisy data, converts its statistics into weights, and
compares a vanilla student against a weighted student on a clean dev set.
"""

from geckit.align import MAP_KEEP, build_vocab, encode_corpus
from geckit.model import Tagger, TokenVocab
from geckit.signals import generate_signals
from geckit.synth import SynthConfig, generate
from geckit.trainer import TrainConfig, evaluate_model, train
from geckit.weights import WeightConfig, compute_weights

world = generate(SynthConfig(n_train=2000, n_dev=300, seed=11, corruption_rate=0.2))
print(f"train: {len(world.train)} samples ({len(world.corrupted_ids)} with corrupted annotations)")
print(f"dev:   {len(world.dev)} clean samples\n")

vocab = build_vocab(world.train, cap=100)
enc_train, _ = encode_corpus(world.train, vocab, oov_policy=MAP_KEEP)
enc_dev, _ = encode_corpus(world.dev, vocab, oov_policy=MAP_KEEP)
token_vocab = TokenVocab.build([s.source for s in enc_train])

teacher = Tagger.create(token_vocab, vocab, embed_dim=24, hidden_dim=48, seed=99)
train(teacher, enc_train, TrainConfig(epochs=14, batch_size=32, lr=5e-3, shuffle_seed=99), dev_corpus=enc_dev)
signals = generate_signals(teacher, enc_train)

weights = {w.sample_id: w for w in compute_weights(signals, WeightConfig())}
corrupted_w = [weights[i].w_token.mean() for i in sorted(world.corrupted_ids)]
clean_w = [weights[i].w_token.mean() for i in range(len(world.train)) if i not in world.corrupted_ids]
print(f"mean token weight on corrupted samples: {sum(corrupted_w)/len(corrupted_w):.3f}")
print(f"mean token weight on clean samples:     {sum(clean_w)/len(clean_w):.3f}")
print("the teacher systematically downweights the corrupted annotations\n")

cfg = TrainConfig(epochs=6, batch_size=32, lr=5e-3, shuffle_seed=1)
for mode in ("none", "mixed"):
    student = Tagger.create(token_vocab, vocab, embed_dim=24, hidden_dim=48, seed=1)
    train(
        student,
        enc_train,
        TrainConfig(**{**cfg.__dict__, "mode": mode}),
        weights_by_id=weights if mode == "mixed" else None,
        dev_corpus=enc_dev,
    )
    p, r, f = evaluate_model(student, world.dev)
    print(f"{mode:>5}: P={p:.4f} R={r:.4f} F0.5={f:.4f}")

print("\nweighted training recovers part of what the annotation noise destroys")
