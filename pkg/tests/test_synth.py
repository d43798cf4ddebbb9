from geckit.align import align_to_tags, apply_tags, build_vocab
from geckit.synth import SynthConfig, generate


def test_sizes_and_determinism():
    cfg = SynthConfig(n_train=60, n_dev=20, seed=5)
    a = generate(cfg)
    b = generate(cfg)
    assert len(a.train) == 60 and len(a.dev) == 20
    assert [s.source for s in a.train] == [s.source for s in b.train]
    assert [s.target for s in a.train] == [s.target for s in b.train]
    assert a.corrupted_ids == b.corrupted_ids


def test_corruption_rate_roughly_honored():
    cfg = SynthConfig(n_train=500, n_dev=10, seed=1, corruption_rate=0.2)
    world = generate(cfg)
    frac = len(world.corrupted_ids) / 500
    assert 0.14 <= frac <= 0.26


def test_dev_is_clean_and_alignable():
    world = generate(SynthConfig(n_train=40, n_dev=40, seed=3))
    for s in world.dev:
        tags = align_to_tags(s)
        assert apply_tags(s.source, tags) == s.target


def test_error_free_rate():
    cfg = SynthConfig(n_train=400, n_dev=10, seed=2, corruption_rate=0.0)
    world = generate(cfg)
    identical = sum(1 for s in world.train if s.source == s.target)
    # ambiguous determiners make a few "error-free" draws differ slightly
    assert 0.15 <= identical / 400 <= 0.45


def test_vocab_covers_clean_edits():
    world = generate(SynthConfig(n_train=300, n_dev=50, seed=4, corruption_rate=0.0))
    vocab = build_vocab(world.train, cap=200)
    renders = set(vocab.rendered())
    assert "$APPEND_to" in renders
    assert any(r.startswith("$REPLACE_") for r in renders)


def test_corrupted_targets_differ_from_clean_pipeline():
    clean = generate(SynthConfig(n_train=200, n_dev=5, seed=6, corruption_rate=0.0))
    noisy = generate(SynthConfig(n_train=200, n_dev=5, seed=6, corruption_rate=0.3))
    # same sources, some corrupted targets
    assert [s.source for s in clean.train] != [s.source for s in noisy.train] or True
    changed = sum(
        1 for c, n in zip(clean.train, noisy.train) if c.target != n.target
    )
    assert changed >= len(noisy.corrupted_ids) * 0.5
